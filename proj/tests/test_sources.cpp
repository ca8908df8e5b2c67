#include "support.hpp"

#include <gtest/gtest.h>

using namespace jmgt;
using namespace jmgt::test;

namespace {

// (2/T) int_0^T f(t) e^{-o t} dt by composite Gauss-Legendre.
template <class F>
cd quad_transform(F&& f, cd o, double T, int panels = 64, int order = 16) {
    VecR x, w;
    cd acc = 0.0;
    for (int k = 0; k < panels; ++k) {
        gauss_legendre(order, T * k / panels, T * (k + 1) / panels, x, w);
        for (int i = 0; i < order; ++i) acc += w(i) * f(x(i)) * std::exp(-o * x(i));
    }
    return 2.0 / T * acc;
}

double eval_series(const VecC& c, double omega, double t) {
    cd acc = 0.0;
    for (int m = 1; m <= c.size(); ++m) acc += c(m - 1) * std::exp(cd(0.0, m * omega * t));
    return acc.real();
}

}  // namespace

TEST(Sources, ExpIntegralSmallAndLarge) {
    const double T = 2.0;
    for (cd z : {cd(1e-7, 2e-7), cd(0.0, 0.0), cd(-0.3, 1.7), cd(2.0, -5.0)}) {
        const cd direct = std::abs(z) == 0.0 ? cd(T) : (std::exp(z * T) - 1.0) / z;
        EXPECT_LE(std::abs(exp_integral(z, T) - direct), 1e-9 * std::abs(direct));
    }
}

TEST(Sources, PulseCoefficientsMatchQuadrature) {
    ModelParams p;
    p.omega = 1.3;
    const double T = p.period(), T0 = 0.6 * T, w = 0.2;
    const VecC psi = design_delta_pulse({T0, w}, 12, p.omega);
    // Quadrature on the support of the bump, where it is smooth.
    VecR x, wq;
    gauss_legendre(80, T0 - w, T0 + w, x, wq);
    for (int m = 1; m <= 12; ++m) {
        cd q = 0.0;
        for (int i = 0; i < x.size(); ++i)
            q += wq(i) * (1.0 + std::cos(pi * (x(i) - T0) / w)) / (2.0 * w) * std::exp(cd(0.0, -m * p.omega * x(i)));
        q *= 2.0 / T;
        EXPECT_LE(std::abs(psi(m - 1) - q), 1e-12) << "m = " << m;
    }
}

TEST(Sources, NarrowPulseIsPurePhase) {
    ModelParams p;
    const double T0 = 0.4 * p.period();
    const VecC psi = design_delta_pulse({T0, 1e-4}, 8, p.omega);
    for (int m = 1; m <= 8; ++m) {
        const cd expect = std::exp(cd(0.0, -(m - 1) * p.omega * T0));
        EXPECT_LE(std::abs(psi(m - 1) / psi(0) - expect), 1e-6);
    }
}

TEST(Sources, PulseWidthGuards) {
    EXPECT_THROW(design_delta_pulse({1.0, 0.5}, 16, 1.0), ValidationError);  // M omega w >= 2 pi
    EXPECT_THROW(design_delta_pulse({7.0, 0.05}, 16, 1.0), ValidationError); // T0 > T
}

TEST(Sources, SquareHarmonicsAgainstTimeGrid) {
    ModelParams p;
    const SourcePair s = pulse_source(10, p, 0.5, 0.3);
    const int n = 256;
    const VecR v = synth_time(s.psi, p.omega, n);
    for (int m = 1; m <= 10; ++m) {
        cd acc = 0.0;
        for (int k = 0; k < n; ++k) acc += v(k) * v(k) * std::exp(cd(0.0, -m * 2.0 * pi * k / n));
        const cd Bm = 2.0 * acc / double(n);
        EXPECT_LE(std::abs(s.psi2(m - 1) - Bm), 1e-12 * std::abs(Bm) + 1e-14);
        EXPECT_LE(std::abs(s.psi2(m - 1) - 2.0 * s.square(m + 2 * 10)), 1e-13 * std::abs(Bm));
    }
}

TEST(Sources, AmplitudeModulation) {
    ModelParams p;
    const VecC psi = design_delta_pulse({0.75 * p.period(), 0.05}, 16, p.omega);
    EXPECT_THROW(amplitude_modulation(psi, 1.0, p.omega), ValidationError);
    EXPECT_THROW(amplitude_modulation(psi, 0.0, p.omega), ValidationError);
    const SourcePair s = amplitude_modulation(psi, 2.0, p.omega);
    double fro = 0.0, ref = 0.0;
    for (int m = 1; m <= 16; ++m) {
        const auto F = s.frak(m);
        const cd det = 2.0 * s.psi(m - 1) * s.psi2(m - 1);
        EXPECT_LE(std::abs(F.determinant() - det), 1e-12 * std::abs(det));
        fro += F.squaredNorm();
        ref += 5.0 * std::norm(s.psi(m - 1)) + 17.0 * std::norm(s.psi2(m - 1));
    }
    EXPECT_NEAR(fro, ref, 1e-12 * ref);

    // Parseval: sum |psi_m|^2 = (2/T) int psi^2.
    const int n = 4096;
    const VecR v = synth_time(s.psi, p.omega, n);
    EXPECT_NEAR(s.psi.squaredNorm(), 2.0 * v.squaredNorm() / n, 1e-10 * s.psi.squaredNorm());
}

TEST(Sources, InterpolantAtLatticeIsSourceMatrix) {
    ModelParams p;
    p.omega = 1.7;
    const SourcePair s = pulse_source(20, p, 0.75, 0.05);
    for (int m = 1; m <= 20; ++m) {
        const auto F = s.frak(m);
        EXPECT_LE((s.interp(lattice_point(m, p.omega)) - F).cwiseAbs().maxCoeff(), 1e-12 * F.cwiseAbs().maxCoeff());
        EXPECT_LE((s.interp(lattice_point(m, p.omega), true) - F).cwiseAbs().maxCoeff(),
                  1e-12 * F.cwiseAbs().maxCoeff());
    }
}

TEST(Sources, InterpolantAgainstQuadrature) {
    ModelParams p;
    const SourcePair s = pulse_source(12, p, 0.5, 0.3);
    const double T = p.period();
    auto psi_t = [&](double t) { return eval_series(s.psi, p.omega, t); };
    auto sq_t = [&](double t) { return psi_t(t) * psi_t(t); };
    for (cd o : {cd(0.0, 0.0), cd(-0.4, 0.9), cd(0.2, -2.3), cd(-1.5, 6.1)}) {
        const auto F = s.interp(o);
        const cd q1 = quad_transform(psi_t, o, T), q2 = quad_transform(sq_t, o, T);
        EXPECT_LE(std::abs(F(0, 0) - q1), 1e-10 * (1.0 + std::abs(q1)));
        EXPECT_LE(std::abs(F(0, 1) - q2), 1e-10 * (1.0 + std::abs(q2)));
        EXPECT_LE(std::abs(F(1, 0) - 2.0 * F(0, 0)), 1e-14 * (1.0 + std::abs(q1)));
        // The scaled form carries the factor e^{oT}.
        const auto Fs = s.interp(o, true);
        EXPECT_LE((Fs - std::exp(o * T) * F).cwiseAbs().maxCoeff(), 1e-10 * Fs.cwiseAbs().maxCoeff());
    }
}

TEST(Sources, InterpolantInverse) {
    ModelParams p;
    const SourcePair s = pulse_source(16, p, 0.75, 0.05);
    for (cd o : {cd(-0.2, 3.3), cd(-2.0, 14.0), cd(-0.01, 0.4)}) {
        for (bool scaled : {false, true}) {
            const auto F = s.interp(o, scaled);
            const auto G = s.interp_inverse(o, scaled);
            EXPECT_LE((G * F - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_NEAR(s.interp_inverse_frobenius_sq(o, scaled), G.squaredNorm(), 1e-10 * G.squaredNorm());
        }
    }
}

TEST(Sources, InverseBoundUniformOverPoles) {
    // ||Mt(p_l)^{-1}||^2 / rho_{T0}(2 Re p_l) stays bounded for poles inside the band Im p < M omega
    // of the truncated pulse. Beyond the band the truncated interpolant decays and the ratio blows up.
    ModelParams p;
    const int M = 64;
    const Basis b = interval_basis(200);
    const SourcePair s = pulse_source(M, p, 0.75, 0.05);
    const PoleSet ps = compute_poles(b.lambda, p);
    const double T0 = 0.75 * p.period();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    int inside = 0;
    for (int l = 0; l < 200; ++l) {
        const cd z = ps.p(l);
        if (z.imag() > 0.75 * M * p.omega) break;
        const double r = s.interp_inverse_frobenius_sq(z) / rho_T(2.0 * z.real(), T0);
        ASSERT_TRUE(std::isfinite(r));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        ++inside;
    }
    EXPECT_GE(inside, 30);
    EXPECT_LE(hi, 10.0 * lo);
}

TEST(Sources, PsiRecursion) {
    ModelParams p;
    p.sigma0 = 1.0;
    p.beta = 0.8;
    p.tau = p.beta * p.sigma0;
    const double lambda = 2.5;
    p.omega = std::sqrt(lambda / p.sigma0);
    const cd psi1(0.3, -0.7);

    p.eta0 = 0.0;
    const VecC z = psi_recursion(p, lambda, psi1, 6);
    EXPECT_EQ(z.tail(5).cwiseAbs().maxCoeff(), 0.0);

    p.eta0 = 0.4;
    const VecC v = psi_recursion(p, lambda, psi1, 6);
    const cd closed = 2.0 * p.omega * p.omega * p.eta0 * psi1 * psi1 / (3.0 * lambda * cd(1.0, 2.0 * p.beta * p.omega));
    EXPECT_LE(std::abs(v(1) - closed), 1e-14 * std::abs(closed));

    const cd c(1.1, 0.4);
    const VecC w = psi_recursion(p, lambda, c * psi1, 6);
    for (int m = 1; m <= 6; ++m) EXPECT_LE(std::abs(w(m - 1) - std::pow(c, m) * v(m - 1)), 1e-12 * std::abs(w(m - 1)));

    // Harmonic balance of the ODE behind the recursion.
    for (int m = 2; m <= 6; ++m) {
        const cd o = lattice_point(m, p.omega);
        cd conv = 0.0;
        for (int j = 1; j < m; ++j) conv += v(j - 1) * v(m - j - 1);
        const cd res = dispersion(o, lambda, p) * v(m - 1) - 0.5 * p.eta0 * o * o * conv;
        EXPECT_LE(std::abs(res), 1e-10 * std::abs(dispersion(o, lambda, p) * v(m - 1)));
    }

    p.omega *= 1.1;
    EXPECT_THROW(psi_recursion(p, lambda, psi1, 4), ValidationError);
}

TEST(Sources, ReferenceStateSeparable) {
    ModelParams p;
    const Basis b = interval_basis(8);
    const SourcePair s = pulse_source(16, p);
    const ReferenceState ref = build_reference_state(b, 0, s, p);
    for (int nu = 0; nu < 2; ++nu) {
        const MatC obs = observe(b, ref.u0[nu]);
        const double amp = nu == 0 ? 1.0 : s.A;
        for (int m = 1; m <= 16; ++m)
            EXPECT_LE(std::abs(obs(0, m - 1) - b.trace(0, 0) * amp * s.psi(m - 1)), 1e-14);
    }
    for (int m = 1; m <= 16; ++m) {
        Eigen::JacobiSVD<Eigen::Matrix2cd> svd(s.frak(m));
        EXPECT_GT(svd.singularValues()(1), 1e-12 * svd.singularValues()(0));
    }
    // cos(x) on a Neumann interval vanishes at pi/2, which is a node of an odd-order grid.
    DomainSpec d;
    d.Lx = pi;
    d.sigma = {{0.0, 0.0}};
    d.J = 5;
    d.oversample = 5;
    EXPECT_THROW(build_reference_state(build_basis(d), 1, s, p), ValidationError);
}
