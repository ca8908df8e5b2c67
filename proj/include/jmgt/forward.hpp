#pragma once

#include "jmgt/sources.hpp"
#include "jmgt/spectral.hpp"
#include "jmgt/types.hpp"

namespace jmgt {

// vartheta(o) = tau o^3 + sigma0 o^2, Theta(o) = beta o + 1.
cd vartheta(cd o, const ModelParams& p);
cd vartheta_d(cd o, const ModelParams& p);
cd Theta(cd o, const ModelParams& p);
inline cd Theta_d(cd, const ModelParams& p) { return cd(p.beta, 0.0); }
// vartheta(o) + Theta(o) lambda and its o-derivative.
cd dispersion(cd o, double lambda, const ModelParams& p);
cd dispersion_d(cd o, double lambda, const ModelParams& p);
// Psi = -vartheta/Theta.
cd Psi(cd o, const ModelParams& p);
cd Psi_d(cd o, const ModelParams& p);

// Diagonal of L_m(sigma0) on eigenspace lambda.
cd harmonic_symbol(int m, double lambda, const ModelParams& p);

// Grid values Nq x M of a harmonic field.
MatC synth_grid(const Basis& basis, const HarmonicField& u);
// Pointwise B_m(U, V) for all m on grid values (Nq x M).
MatC convolve_B_grid(const MatC& U, const MatC& V);
HarmonicField convolve_B(const Basis& basis, const HarmonicField& u, const HarmonicField& v);

// L_m(sigma) u_m + eta B_m(u, u), products on the quadrature grid.
HarmonicField apply_model(const Basis& basis, const HarmonicField& u, const VecR& sigma_grid,
                          const VecR& eta_grid, const ModelParams& p);
// Same operator evaluated from time samples of u(x, t).
HarmonicField apply_model_timegrid(const Basis& basis, const HarmonicField& u, const VecR& sigma_grid,
                                   const VecR& eta_grid, const ModelParams& p);

struct SolveOptions {
    double tol = 1e-13;
    int max_iter = 2000;
    double damping = 1.0;
};

struct SolveResult {
    HarmonicField u;
    double residual = 0.0;  // relative, from the time-sampled operator
    int iterations = 0;
    double damping = 1.0;   // 0 when the Newton fallback produced the solution
};

SolveResult solve_multiharmonic(const Basis& basis, const HarmonicField& r, const VecR& sigma_grid,
                                const VecR& eta_grid, const ModelParams& p, const SolveOptions& opt = {});

// Trace of every harmonic on the observation set: Ns x M.
MatC observe(const Basis& basis, const HarmonicField& u);

struct LinInput {
    VecC a_sigma;  // coefficients of phi * sigma_lin
    VecC a_eta;    // coefficients of phi^2 * eta_lin
    FieldPair u;
};

struct LinData {
    FieldPair r;
    std::array<MatC, 2> p;
};

LinInput input_from_fields(const Basis& basis, const ReferenceState& ref, const VecR& sigma_lin,
                           const VecR& eta_lin, const FieldPair& u);

LinData linearized_forward(const Basis& basis, const LinInput& in, const SourcePair& src, const ModelParams& p);

// Full nonlinear all-at-once map: model part L(sigma)u + eta B(u,u) and traces.
struct NonlinState {
    VecR sigma;  // grid values
    VecR eta;
    FieldPair u;
};

LinData nonlinear_forward(const Basis& basis, const NonlinState& xi, const ModelParams& p);
// Directional derivative of nonlinear_forward at xi along dxi.
LinData nonlinear_derivative(const Basis& basis, const NonlinState& xi, const NonlinState& dxi, const ModelParams& p);

}  // namespace jmgt
