#pragma once

#include "jmgt/spectral.hpp"
#include "jmgt/types.hpp"

namespace jmgt {

// int_0^T e^{z t} dt, stable near z = 0.
cd exp_integral(cd z, double T);

// int_0^T e^{(i nu - o) t} dt for nu a multiple of omega; scaled multiplies by e^{oT},
// which stays bounded for Re o <= 0 where the plain value grows like e^{-Re o T}.
cd lattice_exp_integral(double nu, cd o, double T, bool scaled = false);

// (2/T) int_0^T v(t) e^{-o t} dt for v(t) = Re sum_{k=1}^{M} c_k e^{i k omega t}.
cd harmonic_interpolant(const VecC& c, cd o, double omega, bool scaled = false);

// Quadratic harmonic product B_m(u, v) for scalar sequences (index k-1 holds harmonic k).
cd sequence_Bm(const VecC& u, const VecC& v, int m);

struct PulseSpec {
    double T0 = 0.0;     // concentration time in (0, T]
    double width = 0.05; // half-width of the raised-cosine bump
};

// Fourier coefficients (2/T) int psi e^{-i m omega t}, m = 1..M, of the T-periodic
// raised-cosine bump of unit mass centred at T0.
VecC design_delta_pulse(const PulseSpec& pulse, int M, double omega);

struct SourcePair {
    double A = 2.0;
    double omega = 1.0;
    VecC psi;     // psi_m, m = 1..M
    VecC psi2;    // B_m(psi, psi)
    VecC square;  // Fourier coefficients s_n of psi(t)^2, n = -2M..2M (index n + 2M)

    int M() const { return static_cast<int>(psi.size()); }
    double period() const { return 2.0 * pi / omega; }

    Eigen::Matrix2cd frak(int m) const;
    // Analytic interpolant; equals frak(m) at o = i m omega.
    Eigen::Matrix2cd interp(cd o, bool scaled = false) const;
    Eigen::Matrix2cd interp_inverse(cd o, bool scaled = false) const;
    double interp_inverse_frobenius_sq(cd o, bool scaled = false) const;
};

SourcePair amplitude_modulation(const VecC& psi, double A, double omega);

// psi_m for the interior-excitation recursion; requires omega^2 = lambda/sigma0, tau = beta*sigma0.
VecC psi_recursion(const ModelParams& params, double lambda, cd psi1, int M);

struct ReferenceState {
    int mode = 0;
    VecR phi_grid;
    double min_abs_phi = 0.0;
    FieldPair u0;
    FieldPair source;  // L_m(sigma0) u0
    // Boundary flux d_nu phi at the observation points and its harmonic weight per signal.
    VecR flux_sigma;
    std::array<VecC, 2> flux_harmonics;
};

ReferenceState build_reference_state(const Basis& basis, int mode, const SourcePair& src,
                                     const ModelParams& params);

}  // namespace jmgt
