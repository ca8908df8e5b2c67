#include "jmgt/norms.hpp"

#include <cmath>

namespace jmgt {

double lambda_pow(double lambda, double s) {
    if (s == 0.0) return 1.0;
    if (lambda == 0.0) return 0.0;
    return std::pow(lambda, s);
}

double hs_norm(const VecC& a, const VecR& lambda, double s) {
    double acc = 0.0;
    for (int j = 0; j < a.size(); ++j) acc += lambda_pow(lambda(j), s) * std::norm(a(j));
    return std::sqrt(acc);
}

double bochner_norm(const HarmonicField& u, const VecR& lambda, double omega, double sigma_t, double s) {
    double acc = 0.0;
    for (int m = 1; m <= u.M(); ++m) {
        const double wt = std::pow(m * omega, 2.0 * sigma_t);
        for (int j = 0; j < u.J(); ++j) acc += wt * lambda_pow(lambda(j), s) * std::norm(u(j, m));
    }
    return std::sqrt(acc);
}

double bochner_norm(const FieldPair& u, const VecR& lambda, double omega, double sigma_t, double s) {
    return std::hypot(bochner_norm(u[0], lambda, omega, sigma_t, s), bochner_norm(u[1], lambda, omega, sigma_t, s));
}

double X_norm(const Basis& basis, const LinInput& xi, double omega, const NormSpec& ns) {
    const double a1 = hs_norm(xi.a_sigma, basis.lambda, ns.s);
    const double a2 = hs_norm(xi.a_eta, basis.lambda, ns.s);
    const double b = bochner_norm(xi.u, basis.lambda, omega, ns.sigma_check, ns.s - ns.sigma_check);
    return std::sqrt(a1 * a1 + a2 * a2 + b * b);
}

double state_weight(int m, double lambda, const ModelParams& p, const NormSpec& ns) {
    const cd o = lattice_point(m, p.omega);
    return std::pow(std::abs(o), 4.0 + 2.0 * ns.sigma_check) * lambda_pow(lambda, ns.s - ns.sigma_check) /
           std::norm(dispersion(o, lambda, p));
}

double Y_obs_norm(const Basis& basis, const CoefficientSplit& split, const SourcePair& src, const ModelParams& p,
                  const NormSpec& ns) {
    double acc = 0.0;
    for (int l = 0; l < basis.size(); ++l) {
        const double lam = basis.lambda(l);
        acc += lambda_pow(lam, ns.s) * split.obs[l].squaredNorm();
        for (int m = 1; m <= src.M(); ++m) acc += state_weight(m, lam, p, ns) * (src.frak(m) * split.obs[l]).squaredNorm();
    }
    return std::sqrt(acc);
}

double Y_mod_norm(const Basis& basis, const CoefficientSplit& split, const FieldPair& r, const SourcePair& src,
                  const ModelParams& p, const NormSpec& ns) {
    double acc = 0.0;
    for (int l = 0; l < basis.size(); ++l) {
        const double lam = basis.lambda(l);
        acc += lambda_pow(lam, ns.s) * split.mod[l].squaredNorm();
        for (int m = 1; m <= src.M(); ++m) {
            const Eigen::Vector2cd rr(r[0](l, m), r[1](l, m));
            acc += state_weight(m, lam, p, ns) * (src.frak(m) * split.mod[l] - rr).squaredNorm();
        }
    }
    return std::sqrt(acc);
}

double Ytilde_obs_norm(const FieldPair& ext, const VecR& lambda, double omega, double s) {
    double acc = 0.0;
    for (int m = 1; m <= ext[0].M(); ++m) {
        double col = 0.0;
        for (int nu = 0; nu < 2; ++nu)
            for (int j = 0; j < ext[nu].J(); ++j) col += lambda_pow(lambda(j), s + 1.0) * std::norm(ext[nu](j, m));
        acc += (1.0 + m * omega) * std::sqrt(col);
    }
    return acc;
}

double rho_T(double y, double T) {
    const double yT = y * T;
    if (std::abs(yT) < 1e-8) return 1.0 / T * (1.0 + 0.5 * yT);
    return y / -std::expm1(-yT);
}

double J_chi(int m, double lambda, double chi, const ModelParams& p) {
    return std::norm(dispersion(lattice_point(m, p.omega), lambda, p)) * lambda_pow(lambda, chi);
}

double C_hat(double chi, const ModelParams& p) {
    const double r = 1.0 - p.tau / (p.beta * p.sigma0);
    return (2.0 + chi) / (2.0 * p.sigma0 * p.sigma0) * (1.0 + 1.0 / (p.beta * p.beta * p.omega * p.omega)) / (r * r);
}

double J_bound_slack(int m, double lambda, double chi, const ModelParams& p) {
    if (chi > 0.0 && !(p.tau > 0.0)) throw ValidationError("bound with chi > 0 needs tau > 0");
    if (!(p.tau < p.beta * p.sigma0)) throw ValidationError("bound needs tau < beta sigma0");
    const double lhs = std::pow(m * p.omega, 4.0 + 2.0 * chi) / J_chi(m, lambda, chi, p);
    const double rhs = C_hat(chi, p) * (chi > 0.0 ? std::pow(p.beta / p.tau, chi) : 1.0);
    return rhs - lhs;
}

}  // namespace jmgt
