#include "jmgt/sources.hpp"

#include "jmgt/forward.hpp"

#include <cmath>

namespace jmgt {

namespace {

cd expm1c(cd w) {
    const double x = w.real(), y = w.imag();
    const double sh = std::sin(0.5 * y);
    return {std::expm1(x) * std::cos(y) - 2.0 * sh * sh, std::exp(x) * std::sin(y)};
}

// sin z / (z (1 - z^2/pi^2)), written to stay finite at z = pi.
double bump_spectrum(double z) {
    if (z == 0.0) return 1.0;
    const double u = pi - z;
    const double sinc = std::abs(u) < 1e-8 ? 1.0 - u * u / 6.0 : std::sin(u) / u;
    return pi * pi * sinc / (z * (pi + z));
}

}  // namespace

cd exp_integral(cd z, double T) {
    const cd w = z * T;
    if (std::abs(w) < 1e-4) return T * (1.0 + w / 2.0 + w * w / 6.0 + w * w * w / 24.0);
    return expm1c(w) / z;
}

cd lattice_exp_integral(double nu, cd o, double T, bool scaled) {
    const cd z = cd(0.0, nu) - o;
    if (!scaled) return exp_integral(z, T);
    // e^{oT} int_0^T e^{z t} dt with e^{i nu T} = 1
    if (std::abs(z * T) < 1e-4) return std::exp(o * T) * exp_integral(z, T);
    return -expm1c(o * T) / z;
}

cd harmonic_interpolant(const VecC& c, cd o, double omega, bool scaled) {
    const double T = 2.0 * pi / omega;
    cd acc = 0.0;
    for (int k = 1; k <= c.size(); ++k) {
        const double nu = k * omega;
        acc += c(k - 1) * lattice_exp_integral(nu, o, T, scaled) +
               std::conj(c(k - 1)) * lattice_exp_integral(-nu, o, T, scaled);
    }
    return acc / T;
}

cd sequence_Bm(const VecC& u, const VecC& v, int m) {
    const int M = static_cast<int>(u.size());
    cd a = 0.0, b = 0.0;
    for (int l = 1; l < m; ++l) a += u(l - 1) * v(m - l - 1);
    for (int k = 1; k + m <= M; ++k) b += std::conj(u(k - 1)) * v(k + m - 1) + u(k + m - 1) * std::conj(v(k - 1));
    return 0.5 * (a + b);
}

VecC design_delta_pulse(const PulseSpec& pulse, int M, double omega) {
    const double T = 2.0 * pi / omega;
    if (M < 1) throw ValidationError("need at least one harmonic");
    if (!(pulse.T0 > 0.0) || pulse.T0 > T * (1.0 + 1e-14))
        throw ValidationError("pulse time T0 must lie in (0, T]");
    if (!(pulse.width > 0.0) || pulse.width >= 0.5 * T)
        throw ValidationError("pulse width must lie in (0, T/2)");
    if (M * omega * pulse.width >= 2.0 * pi)
        throw ValidationError("pulse too wide: its spectrum vanishes below harmonic M");
    VecC psi(M);
    for (int m = 1; m <= M; ++m) {
        const double nu = m * omega;
        psi(m - 1) = (2.0 / T) * std::exp(cd(0.0, -nu * pulse.T0)) * bump_spectrum(nu * pulse.width);
    }
    return psi;
}

SourcePair amplitude_modulation(const VecC& psi, double A, double omega) {
    if (A == 0.0 || A == 1.0 || !std::isfinite(A))
        throw ValidationError("amplitude ratio A must differ from 0 and 1");
    const int M = static_cast<int>(psi.size());
    SourcePair s;
    s.A = A;
    s.omega = omega;
    s.psi = psi;
    s.psi2.resize(M);
    for (int m = 1; m <= M; ++m) s.psi2(m - 1) = sequence_Bm(psi, psi, m);

    // Two-sided coefficients of psi(t) = Re sum psi_k e^{ikwt} and of its square.
    VecC chat = VecC::Zero(2 * M + 1);
    for (int k = 1; k <= M; ++k) {
        chat(M + k) = 0.5 * psi(k - 1);
        chat(M - k) = 0.5 * std::conj(psi(k - 1));
    }
    s.square = VecC::Zero(4 * M + 1);
    for (int a = -M; a <= M; ++a)
        for (int b = -M; b <= M; ++b) s.square(a + b + 2 * M) += chat(a + M) * chat(b + M);

    for (int m = 1; m <= M; ++m) {
        if (std::abs(s.psi(m - 1)) == 0.0 || std::abs(s.psi2(m - 1)) == 0.0)
            throw ValidationError("source matrix singular at harmonic " + std::to_string(m));
    }
    return s;
}

Eigen::Matrix2cd SourcePair::frak(int m) const {
    Eigen::Matrix2cd F;
    F << psi(m - 1), psi2(m - 1), A * psi(m - 1), A * A * psi2(m - 1);
    return F;
}

Eigen::Matrix2cd SourcePair::interp(cd o, bool scaled) const {
    const double T = period();
    const int Mh = M();
    const cd i1 = harmonic_interpolant(psi, o, omega, scaled);
    cd i2 = 0.0;
    for (int n = -2 * Mh; n <= 2 * Mh; ++n) i2 += square(n + 2 * Mh) * lattice_exp_integral(n * omega, o, T, scaled);
    i2 *= 2.0 / T;
    Eigen::Matrix2cd F;
    F << i1, i2, A * i1, A * A * i2;
    return F;
}

Eigen::Matrix2cd SourcePair::interp_inverse(cd o, bool scaled) const {
    const Eigen::Matrix2cd F = interp(o, scaled);
    const cd i1 = F(0, 0), i2 = F(0, 1);
    const cd det = A * (A - 1.0) * i1 * i2;
    if (std::abs(det) == 0.0) throw NumericalError("source interpolant singular");
    Eigen::Matrix2cd G;
    G << A * A * i2, -i2, -A * i1, i1;
    return G / det;
}

double SourcePair::interp_inverse_frobenius_sq(cd o, bool scaled) const {
    const Eigen::Matrix2cd F = interp(o, scaled);
    const double a2 = A * A, d2 = a2 * (A - 1.0) * (A - 1.0);
    return ((a2 * a2 + 1.0) / std::norm(F(0, 0)) + (a2 + 1.0) / std::norm(F(0, 1))) / d2;
}

VecC psi_recursion(const ModelParams& p, double lambda, cd psi1, int M) {
    if (!(lambda > 0.0)) throw ValidationError("recursion needs a positive eigenvalue");
    const double w2 = lambda / p.sigma0;
    if (std::abs(p.omega * p.omega - w2) > 1e-10 * w2)
        throw ValidationError("recursion requires omega^2 = lambda / sigma0");
    if (std::abs(p.tau - p.beta * p.sigma0) > 1e-10 * p.beta * p.sigma0)
        throw ValidationError("recursion requires tau = beta lambda / omega^2");
    VecC psi = VecC::Zero(M);
    psi(0) = psi1;
    const double w = p.omega;
    for (int m = 2; m <= M; ++m) {
        const double mw = m * w, mw2 = mw * mw;
        const cd den = cd(lambda - p.sigma0 * mw2, mw * (p.beta * lambda - p.tau * mw2));
        if (std::abs(den) < 1e-14 * (lambda + mw2)) throw NumericalError("recursion denominator vanishes");
        cd conv = 0.0;
        for (int j = 1; j < m; ++j) conv += psi(j - 1) * psi(m - j - 1);
        psi(m - 1) = -(mw2 * p.eta0) / (2.0 * den) * conv;
    }
    return psi;
}

ReferenceState build_reference_state(const Basis& basis, int mode, const SourcePair& src,
                                     const ModelParams& params) {
    if (mode < 0 || mode >= basis.size()) throw ValidationError("reference mode out of range");
    if (basis.lambda(mode) == 0.0) throw ValidationError("reference mode must have nonzero eigenvalue");
    ReferenceState ref;
    ref.mode = mode;
    ref.phi_grid = basis.phi.col(mode);
    ref.min_abs_phi = ref.phi_grid.cwiseAbs().minCoeff();
    if (ref.min_abs_phi < 1e-6)
        throw ValidationError("reference eigenfunction has (near) zeros on the quadrature grid");
    const int J = basis.size(), M = src.M();
    const double lam = basis.lambda(mode);
    for (int nu = 0; nu < 2; ++nu) {
        const double amp = nu == 0 ? 1.0 : src.A;
        ref.u0[nu] = HarmonicField(J, M);
        ref.source[nu] = HarmonicField(J, M);
        ref.flux_harmonics[nu].resize(M);
        for (int m = 1; m <= M; ++m) {
            const cd v = amp * src.psi(m - 1);
            ref.u0[nu](mode, m) = v;
            ref.source[nu](mode, m) = harmonic_symbol(m, lam, params) * v;
            const cd o = lattice_point(m, params.omega);
            ref.flux_harmonics[nu](m - 1) = v * (1.0 / (o * o) + params.beta / o);
        }
    }
    const int ns = basis.sigma_size();
    ref.flux_sigma.resize(ns);
    for (int s = 0; s < ns; ++s) ref.flux_sigma(s) = basis.normal_derivative(mode, basis.domain.sigma[s]);
    return ref;
}

}  // namespace jmgt
