#include "jmgt/forward.hpp"

#include <cmath>
#include <limits>

namespace jmgt {

cd vartheta(cd o, const ModelParams& p) { return p.tau * o * o * o + p.sigma0 * o * o; }
cd vartheta_d(cd o, const ModelParams& p) { return 3.0 * p.tau * o * o + 2.0 * p.sigma0 * o; }
cd Theta(cd o, const ModelParams& p) { return p.beta * o + 1.0; }
cd dispersion(cd o, double lambda, const ModelParams& p) { return vartheta(o, p) + Theta(o, p) * lambda; }
cd dispersion_d(cd o, double lambda, const ModelParams& p) { return vartheta_d(o, p) + p.beta * lambda; }
cd Psi(cd o, const ModelParams& p) { return -vartheta(o, p) / Theta(o, p); }
cd Psi_d(cd o, const ModelParams& p) {
    const cd th = Theta(o, p);
    return -(vartheta_d(o, p) * th - vartheta(o, p) * Theta_d(o, p)) / (th * th);
}

cd harmonic_symbol(int m, double lambda, const ModelParams& p) {
    const double mw = m * p.omega, mw2 = mw * mw;
    const cd num(mw2 * p.sigma0 - lambda, p.tau * mw2 * mw - lambda * p.beta * mw);
    return num / mw2;
}

namespace {

MatC symbol_matrix(const Basis& basis, int M, const ModelParams& p) {
    MatC S(basis.size(), M);
    for (int j = 0; j < basis.size(); ++j)
        for (int m = 1; m <= M; ++m) S(j, m - 1) = harmonic_symbol(m, basis.lambda(j), p);
    return S;
}

}  // namespace

MatC synth_grid(const Basis& basis, const HarmonicField& u) { return basis.synth(u.c); }

MatC convolve_B_grid(const MatC& U, const MatC& V) {
    const int nq = static_cast<int>(U.rows()), M = static_cast<int>(U.cols());
    MatC out = MatC::Zero(nq, M);
    const MatC Uc = U.conjugate(), Vc = V.conjugate();
    for (int m = 1; m <= M; ++m) {
        auto col = out.col(m - 1);
        for (int l = 1; l < m; ++l) col += U.col(l - 1).cwiseProduct(V.col(m - l - 1));
        for (int k = 1; k + m <= M; ++k)
            col += Uc.col(k - 1).cwiseProduct(V.col(k + m - 1)) + U.col(k + m - 1).cwiseProduct(Vc.col(k - 1));
        col *= 0.5;
    }
    return out;
}

HarmonicField convolve_B(const Basis& basis, const HarmonicField& u, const HarmonicField& v) {
    return HarmonicField(basis.project(convolve_B_grid(synth_grid(basis, u), synth_grid(basis, v))));
}

HarmonicField apply_model(const Basis& basis, const HarmonicField& u, const VecR& sigma_grid,
                          const VecR& eta_grid, const ModelParams& p) {
    const MatC S = symbol_matrix(basis, u.M(), p);
    const MatC U = synth_grid(basis, u);
    const VecC ds = (sigma_grid.array() - p.sigma0).matrix().cast<cd>();
    MatC g = ds.asDiagonal() * U;
    g += eta_grid.cast<cd>().asDiagonal() * convolve_B_grid(U, U);
    return HarmonicField(S.cwiseProduct(u.c) + basis.project(g));
}

HarmonicField apply_model_timegrid(const Basis& basis, const HarmonicField& u, const VecR& sigma_grid,
                                   const VecR& eta_grid, const ModelParams& p) {
    const int M = u.M(), J = u.J();
    const int nt = 4 * M + 4;
    const double T = p.period();
    MatC E(M, nt);
    for (int m = 1; m <= M; ++m)
        for (int k = 0; k < nt; ++k) E(m - 1, k) = std::exp(cd(0.0, m * p.omega * k * T / nt));
    const MatC U = synth_grid(basis, u);
    const MatR ut = (U * E).real();
    const MatR w = eta_grid.asDiagonal() * ut.cwiseProduct(ut);
    MatC g = (2.0 / nt) * (w.cast<cd>() * E.adjoint());

    for (int m = 1; m <= M; ++m) {
        const cd o = lattice_point(m, p.omega);
        g.col(m - 1) += (p.tau * o * VecC::Ones(U.rows()) + sigma_grid.cast<cd>()).cwiseProduct(U.col(m - 1));
    }
    MatC out = basis.project(g);
    for (int j = 0; j < J; ++j)
        for (int m = 1; m <= M; ++m) {
            const cd o = lattice_point(m, p.omega);
            out(j, m - 1) += Theta(o, p) * basis.lambda(j) / (o * o) * u.c(j, m - 1);
        }
    return HarmonicField(out);
}

namespace {

// Derivative of apply_model in u along du (real-linear because of the conjugates in B).
MatC model_jacobian_apply(const Basis& basis, const MatC& S, const MatC& U, const VecC& ds, const VecC& eta,
                          const HarmonicField& du) {
    const MatC dU = synth_grid(basis, du);
    MatC g = ds.asDiagonal() * dU;
    g += eta.asDiagonal() * (convolve_B_grid(U, dU) + convolve_B_grid(dU, U));
    return S.cwiseProduct(du.c) + basis.project(g);
}

// Damped Newton on the real and imaginary parts; fallback when the fixed point stalls.
bool newton_solve(const Basis& basis, const HarmonicField& r, const VecR& sigma_grid, const VecR& eta_grid,
                  const ModelParams& p, const MatC& S, double tol, HarmonicField& u, int& iters) {
    const int J = u.J(), M = u.M(), N = J * M;
    const double rn = std::max(r.c.norm(), 1e-300);
    const VecC ds = (sigma_grid.array() - p.sigma0).matrix().cast<cd>();
    const VecC eta = eta_grid.cast<cd>();
    MatC res = apply_model(basis, u, sigma_grid, eta_grid, p).c - r.c;
    double rel = res.norm() / rn;
    MatR Jac(2 * N, 2 * N);
    VecR rhs(2 * N);
    for (int it = 0; it < 50 && rel > tol; ++it) {
        const MatC U = synth_grid(basis, u);
        HarmonicField e(J, M);
        for (int k = 0; k < 2 * N; ++k) {
            const int idx = k % N;
            e.c.setZero();
            e.c(idx % J, idx / J) = k < N ? cd(1.0, 0.0) : cd(0.0, 1.0);
            const MatC col = model_jacobian_apply(basis, S, U, ds, eta, e);
            Jac.col(k).head(N) = Eigen::Map<const MatC>(col.data(), N, 1).real();
            Jac.col(k).tail(N) = Eigen::Map<const MatC>(col.data(), N, 1).imag();
        }
        rhs.head(N) = Eigen::Map<const MatC>(res.data(), N, 1).real();
        rhs.tail(N) = Eigen::Map<const MatC>(res.data(), N, 1).imag();
        const VecR step = Jac.partialPivLu().solve(rhs);
        MatC du(J, M);
        for (int k = 0; k < N; ++k) du(k % J, k / J) = cd(step(k), step(N + k));

        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
            HarmonicField trial(MatC(u.c - t * du));
            const MatC tres = apply_model(basis, trial, sigma_grid, eta_grid, p).c - r.c;
            const double trel = tres.norm() / rn;
            if (std::isfinite(trel) && trel < rel) {
                u = trial;
                res = tres;
                rel = trel;
                accepted = true;
                break;
            }
        }
        iters = it + 1;
        if (!accepted) break;
    }
    return rel <= tol;
}

}  // namespace

SolveResult solve_multiharmonic(const Basis& basis, const HarmonicField& r, const VecR& sigma_grid,
                                const VecR& eta_grid, const ModelParams& p, const SolveOptions& opt) {
    const MatC S = symbol_matrix(basis, r.M(), p);
    const double rn = std::max(r.c.norm(), 1e-300);

    // Jacobi-preconditioned fixed point; keeps the best iterate.
    auto attempt = [&](double theta, SolveResult& out, double& best) -> bool {
        HarmonicField u(S.rows(), S.cols());
        u.c = r.c.cwiseQuotient(S);
        double first = -1.0;
        best = std::numeric_limits<double>::infinity();
        for (int it = 1; it <= opt.max_iter; ++it) {
            const HarmonicField F = apply_model(basis, u, sigma_grid, eta_grid, p);
            const MatC res = F.c - r.c;
            const double rel = res.norm() / rn;
            if (!std::isfinite(rel)) return false;
            if (first < 0.0) first = rel;
            if (rel > 1e8 * std::max(first, 1e-300) && rel > 1.0) return false;
            if (rel < best) {
                best = rel;
                out.u = u;
                out.iterations = it;
            }
            if (rel <= opt.tol) break;
            u.c -= theta * res.cwiseQuotient(S);
        }
        out.damping = theta;
        return true;
    };

    SolveResult out;
    double best = std::numeric_limits<double>::infinity();
    bool ok = attempt(opt.damping, out, best);
    if (!ok) ok = attempt(0.5 * opt.damping, out, best);
    if (!ok || best > opt.tol) {
        HarmonicField u = ok ? out.u : HarmonicField(r.c.cwiseQuotient(S));
        int iters = 0;
        const bool conv = newton_solve(basis, r, sigma_grid, eta_grid, p, S, opt.tol, u, iters);
        if (conv || !ok) {
            if (!conv) throw NumericalError("multiharmonic solve did not converge; reduce eta or the source amplitude");
            out.u = u;
            out.iterations += iters;
            out.damping = 0.0;  // marks the Newton fallback
        }
    }
    const HarmonicField Ft = apply_model_timegrid(basis, out.u, sigma_grid, eta_grid, p);
    out.residual = (Ft.c - r.c).norm() / rn;
    return out;
}

MatC observe(const Basis& basis, const HarmonicField& u) { return basis.trace.cast<cd>() * u.c; }

LinInput input_from_fields(const Basis& basis, const ReferenceState& ref, const VecR& sigma_lin,
                           const VecR& eta_lin, const FieldPair& u) {
    LinInput in;
    const VecR& phi = ref.phi_grid;
    in.a_sigma = basis.project(VecR(phi.cwiseProduct(sigma_lin))).cast<cd>();
    in.a_eta = basis.project(VecR(phi.cwiseProduct(phi).cwiseProduct(eta_lin))).cast<cd>();
    in.u = u;
    return in;
}

LinData linearized_forward(const Basis& basis, const LinInput& in, const SourcePair& src, const ModelParams& p) {
    const int M = in.u[0].M();
    if (src.M() != M) throw ValidationError("source and state harmonic counts differ");
    const MatC S = symbol_matrix(basis, M, p);
    LinData d;
    for (int nu = 0; nu < 2; ++nu) {
        d.r[nu] = HarmonicField(S.cwiseProduct(in.u[nu].c));
        for (int m = 1; m <= M; ++m) {
            const Eigen::Matrix2cd F = src.frak(m);
            d.r[nu].c.col(m - 1) += F(nu, 0) * in.a_sigma + F(nu, 1) * in.a_eta;
        }
        d.p[nu] = observe(basis, in.u[nu]);
    }
    return d;
}

LinData nonlinear_forward(const Basis& basis, const NonlinState& xi, const ModelParams& p) {
    LinData d;
    for (int nu = 0; nu < 2; ++nu) {
        d.r[nu] = apply_model(basis, xi.u[nu], xi.sigma, xi.eta, p);
        d.p[nu] = observe(basis, xi.u[nu]);
    }
    return d;
}

LinData nonlinear_derivative(const Basis& basis, const NonlinState& xi, const NonlinState& dxi, const ModelParams& p) {
    LinData d;
    const VecC ds = (xi.sigma.array() - p.sigma0).matrix().cast<cd>();
    for (int nu = 0; nu < 2; ++nu) {
        const MatC S = symbol_matrix(basis, xi.u[nu].M(), p);
        const MatC U = synth_grid(basis, xi.u[nu]);
        const MatC dU = synth_grid(basis, dxi.u[nu]);
        MatC g = ds.asDiagonal() * dU;
        g += dxi.sigma.cast<cd>().asDiagonal() * U;
        g += dxi.eta.cast<cd>().asDiagonal() * convolve_B_grid(U, U);
        g += xi.eta.cast<cd>().asDiagonal() * (convolve_B_grid(U, dU) + convolve_B_grid(dU, U));
        d.r[nu] = HarmonicField(S.cwiseProduct(dxi.u[nu].c) + basis.project(g));
        d.p[nu] = observe(basis, dxi.u[nu]);
    }
    return d;
}

}  // namespace jmgt
