#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace jmgt;
using namespace jmgt::test;

namespace {

ModelParams unit_params() {
    ModelParams p;
    p.tau = 1.0;
    p.sigma0 = 1.0;
    p.beta = 1.0;
    return p;
}

bool contains(const std::vector<cd>& roots, cd z, double tol) {
    return std::any_of(roots.begin(), roots.end(), [&](cd r) { return std::abs(r - z) <= tol; });
}

}  // namespace

TEST(Poles, FactorizableCubics) {
    const ModelParams p = unit_params();
    const auto r0 = char_roots(0.0, p);
    EXPECT_TRUE(contains(r0, cd(-1.0, 0.0), 1e-12));
    EXPECT_EQ(std::count_if(r0.begin(), r0.end(), [](cd z) { return std::abs(z) < 1e-8; }), 2);

    // p^3 + p^2 + 2p + 2 = (p + 1)(p^2 + 2)
    const auto r2 = char_roots(2.0, p);
    EXPECT_TRUE(contains(r2, cd(-1.0, 0.0), 1e-12));
    EXPECT_TRUE(contains(r2, cd(0.0, std::sqrt(2.0)), 1e-12));
    EXPECT_TRUE(contains(r2, cd(0.0, -std::sqrt(2.0)), 1e-12));

    const cd sel = select_pole(2.0, p);
    EXPECT_LE(std::abs(sel - cd(0.0, std::sqrt(2.0))), 1e-12);
    EXPECT_LE(std::abs(Psi(sel, p) - 2.0), 1e-12);
    EXPECT_LE(std::abs(pole_asymptotic(2.0, p) - cd(0.0, std::sqrt(2.0))), 1e-14);
}

TEST(Poles, RandomResiduals) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0.1, 2.0);
    for (int k = 0; k < 50; ++k) {
        ModelParams p;
        p.sigma0 = U(rng);
        p.beta = U(rng);
        p.tau = std::uniform_real_distribution<double>(0.0, p.sigma0 * p.beta)(rng);
        const double lam = std::exp(std::uniform_real_distribution<double>(-2.0, 8.0)(rng));
        for (const cd z : char_roots(lam, p)) {
            const double scale = p.tau * std::pow(std::abs(z), 3) + p.sigma0 * std::norm(z) +
                                 p.beta * lam * std::abs(z) + lam;
            EXPECT_LE(std::abs(dispersion(z, lam, p)), 1e-12 * scale);
            EXPECT_LE(z.real(), 1e-12 * std::abs(z));
        }
    }
}

TEST(Poles, WesterveltQuadratic) {
    ModelParams p;
    p.tau = 0.0;
    const auto r = char_roots(3.0, p);
    ASSERT_EQ(r.size(), 2u);
    for (const cd z : r) EXPECT_LE(std::abs(p.sigma0 * z * z + p.beta * 3.0 * z + 3.0), 1e-13);
}

TEST(Poles, ZeroDampingIsImaginary) {
    ModelParams p;
    p.sigma0 = 1.2;
    p.beta = 0.7;
    p.tau = p.sigma0 * p.beta;
    for (double lam : {0.5, 3.0, 40.0, 900.0, 1e5}) {
        const cd z = select_pole(lam, p);
        EXPECT_LE(std::abs(z.real()), 1e-10 * std::abs(z));
        EXPECT_LE(std::abs(pole_asymptotic(lam, p) - cd(0.0, std::sqrt(p.beta * lam / p.tau))), 1e-12 * std::abs(z));
    }
    const Basis b = interval_basis(60);
    EXPECT_EQ(fit_pole_constant(b.lambda.tail(59), p), 0.0);
}

TEST(Poles, AsymptoticErrorDecreasesOverDecades) {
    ModelParams p;
    p.tau = 0.5;
    double prev = std::numeric_limits<double>::infinity();
    for (double lam : {10.0, 100.0, 1000.0, 1e4}) {
        const cd ex = select_pole(lam, p);
        const double err = std::abs(ex - pole_asymptotic(lam, p)) / std::abs(ex);
        EXPECT_LT(err, prev) << "lambda = " << lam;
        prev = err;
    }
    // Modulus ratio tends to one.
    const cd far = select_pole(1e6, p);
    EXPECT_NEAR(std::abs(far) / std::sqrt(p.beta * 1e6 / p.tau), 1.0, 1e-5);
}

TEST(Poles, BoundsOnInterval) {
    ModelParams p;
    p.tau = 0.5;
    const Basis b = interval_basis(500);
    const VecR lam = b.lambda.tail(499);  // skip the smallest eigenvalue if it is below the oscillatory range
    const double C = fit_pole_constant(lam, p);
    ASSERT_TRUE(std::isfinite(C));
    const PoleBoundFit f = check_pole_bounds(lam, p, C);
    EXPECT_LE(f.max_real, 0.0);
    EXPECT_GE(f.worst_real_slack, 0.0);
    EXPECT_GE(f.worst_modulus_slack, 0.0);
}

TEST(Poles, RealFallback) {
    // Strong damping with small lambda leaves only real roots.
    ModelParams p;
    p.tau = 0.01;
    p.beta = 5.0;
    VecR lam(1);
    lam << 1.0;
    EXPECT_THROW(select_pole(1.0, p), NumericalError);
    const PoleSet ps = compute_poles(lam, p);
    EXPECT_TRUE(ps.real_fallback[0]);
    EXPECT_EQ(ps.p(0).imag(), 0.0);
    EXPECT_LT(ps.p(0).real(), 0.0);
}
