#include "jmgt/poles.hpp"

#include "jmgt/forward.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace jmgt {

namespace {

cd polish(cd z, double lambda, const ModelParams& p) {
    for (int it = 0; it < 3; ++it) {
        const cd f = dispersion(z, lambda, p);
        const cd df = dispersion_d(z, lambda, p);
        if (std::abs(df) == 0.0) break;
        const cd dz = f / df;
        if (!std::isfinite(std::abs(dz))) break;
        z -= dz;
        if (std::abs(dz) <= 1e-16 * std::max(1.0, std::abs(z))) break;
    }
    return z;
}

}  // namespace

std::vector<cd> char_roots(double lambda, const ModelParams& p) {
    std::vector<cd> roots;
    if (p.tau == 0.0) {
        // sigma0 p^2 + beta lambda p + lambda
        const cd disc = std::sqrt(cd(p.beta * p.beta * lambda * lambda - 4.0 * p.sigma0 * lambda, 0.0));
        const double b = p.beta * lambda;
        const cd q = -0.5 * (b + (disc.real() >= 0.0 ? disc : -disc));
        if (std::abs(q) == 0.0) return {cd(0.0), cd(0.0)};
        roots = {q / p.sigma0, lambda / q};
    } else {
        Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
        C(0, 0) = -p.sigma0 / p.tau;
        C(0, 1) = -p.beta * lambda / p.tau;
        C(0, 2) = -lambda / p.tau;
        C(1, 0) = 1.0;
        C(2, 1) = 1.0;
        Eigen::EigenSolver<Eigen::Matrix3d> es(C, false);
        for (int i = 0; i < 3; ++i) roots.push_back(es.eigenvalues()(i));
    }
    for (auto& z : roots) z = polish(z, lambda, p);
    const double scale = p.tau * std::pow(std::sqrt(lambda + 1.0), 3) + p.sigma0 * (lambda + 1.0) +
                         p.beta * lambda * std::sqrt(lambda + 1.0) + lambda;
    for (const auto& z : roots) {
        const double mag = p.tau * std::pow(std::abs(z), 3) + p.sigma0 * std::norm(z) +
                           p.beta * lambda * std::abs(z) + lambda;
        if (std::abs(dispersion(z, lambda, p)) > 1e-9 * std::max(scale, mag))
            throw NumericalError("characteristic root residual too large");
    }
    return roots;
}

cd pole_asymptotic(double lambda, const ModelParams& p) {
    if (!(p.tau > 0.0)) throw ValidationError("asymptotic pole formula needs tau > 0");
    const double a = p.alpha() / p.tau;
    const double rad = -(p.beta / p.tau) * lambda + 2.0 * p.alpha() / (p.tau * p.beta) + a * a;
    if (rad >= 0.0) throw NumericalError("asymptotic radicand nonnegative: lambda too small");
    return cd(-a, std::sqrt(-rad));
}

cd select_pole(double lambda, const ModelParams& p) {
    const auto roots = char_roots(lambda, p);
    std::vector<cd> upper;
    for (const auto& z : roots)
        if (z.imag() > 1e-12 * std::max(1.0, std::abs(z))) upper.push_back(z);
    if (upper.empty()) throw NumericalError("no oscillatory root for lambda = " + std::to_string(lambda));
    if (upper.size() == 1) return upper.front();
    cd ref;
    try {
        ref = pole_asymptotic(lambda, p);
    } catch (const NumericalError&) {
        ref = cd(0.0, std::sqrt(p.beta * lambda / std::max(p.tau, 1e-300)));
    }
    return *std::min_element(upper.begin(), upper.end(),
                             [&](cd a, cd b) { return std::abs(a - ref) < std::abs(b - ref); });
}

PoleSet compute_poles(const VecR& lambda, const ModelParams& p) {
    PoleSet ps;
    ps.lambda = lambda;
    ps.p.resize(lambda.size());
    ps.real_fallback.assign(lambda.size(), false);
    for (int l = 0; l < lambda.size(); ++l) {
        try {
            ps.p(l) = select_pole(lambda(l), p);
        } catch (const NumericalError&) {
            const auto roots = char_roots(lambda(l), p);
            cd best = roots.front();
            for (const auto& z : roots)
                if (z.real() > best.real()) best = z;
            if (!(lambda(l) > 0.0) || std::abs(Theta(best, p)) < 1e-12)
                throw NumericalError("no usable pole for lambda = " + std::to_string(lambda(l)));
            ps.p(l) = cd(best.real(), 0.0);
            ps.real_fallback[l] = true;
        }
    }
    return ps;
}

int PoleSet::fallback_count() const {
    return static_cast<int>(std::count(real_fallback.begin(), real_fallback.end(), true));
}

double fit_pole_constant(const VecR& lambda, const ModelParams& p) {
    const double al = p.alpha();
    double C = 0.0;
    const PoleSet ps = compute_poles(lambda, p);
    for (int l = 0; l < lambda.size(); ++l) {
        const double lam = lambda(l);
        const cd z = ps.p(l);
        const double s = std::sqrt(p.beta * lam / p.tau);
        const double re_need = -z.real() * p.tau / al - 1.0;
        const double mod_need = std::abs(std::abs(z) / s - 1.0) / al;
        if (al == 0.0) {
            if (std::abs(z.real()) > 1e-12 * s || std::abs(std::abs(z) - s) > 1e-12 * s)
                return std::numeric_limits<double>::infinity();
            continue;
        }
        C = std::max({C, lam * re_need, lam * mod_need});
    }
    return C;
}

PoleBoundFit check_pole_bounds(const VecR& lambda, const ModelParams& p, double C) {
    PoleBoundFit f;
    f.C = C;
    f.max_real = -std::numeric_limits<double>::infinity();
    f.worst_real_slack = f.worst_modulus_slack = std::numeric_limits<double>::infinity();
    const double al = p.alpha();
    const PoleSet ps = compute_poles(lambda, p);
    for (int l = 0; l < lambda.size(); ++l) {
        const double lam = lambda(l);
        for (const auto& z : char_roots(lam, p)) f.max_real = std::max(f.max_real, z.real());
        const cd z = ps.p(l);
        const double s = std::sqrt(p.beta * lam / p.tau);
        const double upper_re = (al / p.tau) * (1.0 + C / lam);
        const double tol = 1e-12 * std::max(1.0, s);
        f.worst_real_slack = std::min({f.worst_real_slack, upper_re - (-z.real()) + tol, -z.real() + tol});
        const double band = s * C * al / lam;
        f.worst_modulus_slack = std::min(f.worst_modulus_slack, band - std::abs(std::abs(z) - s) + tol);
    }
    return f;
}

}  // namespace jmgt
