#include "support.hpp"

#include <gtest/gtest.h>

using namespace jmgt;
using namespace jmgt::test;

namespace {

struct Roundtrip {
    Basis basis;
    ModelParams p;
    SourcePair src;
    PoleSet poles;

    Roundtrip(int J, int M, double tau) : basis(interval_basis(J)) {
        p.tau = tau;
        src = pulse_source(M, p);
        poles = compute_poles(basis.lambda, p);
    }
};

}  // namespace

TEST(Reconstruct, OraclePipelineIsExact) {
    Roundtrip s(16, 64, 0.5);
    std::mt19937_64 rng(21);
    const LinInput in = random_input(16, 64, rng);
    const LinData d = linearized_forward(s.basis, in, s.src, s.p);
    const Reconstruction rec = reconstruct_oracle(s.basis, in, d, s.poles, s.src, s.p);
    EXPECT_LE(max_rel(rec.xi.a_sigma, in.a_sigma), 1e-9);
    EXPECT_LE(max_rel(rec.xi.a_eta, in.a_eta), 1e-9);
    for (int nu = 0; nu < 2; ++nu) EXPECT_LE(max_rel(rec.xi.u[nu].c, in.u[nu].c), 1e-9);
}

TEST(Reconstruct, ChannelSeparation) {
    Roundtrip s(16, 64, 0.5);
    std::mt19937_64 rng(22);
    LinInput in = random_input(16, 64, rng);
    in.a_sigma.setZero();
    const LinData d = linearized_forward(s.basis, in, s.src, s.p);
    const Reconstruction rec = reconstruct(s.basis, d, s.poles, s.src, s.p);
    EXPECT_LE(rec.xi.a_sigma.cwiseAbs().maxCoeff(), 1e-10 * in.a_eta.cwiseAbs().maxCoeff());
}

TEST(Reconstruct, FitAgreesWithOracle) {
    Roundtrip s(16, 64, 0.5);
    std::mt19937_64 rng(23);
    const LinInput in = random_input(16, 64, rng);
    const LinData d = linearized_forward(s.basis, in, s.src, s.p);
    const Residues o = residues_oracle(s.basis, in, d.r, s.poles, s.src, s.p);
    const Residues f = residues_fit(s.basis, d.p, d.r, s.poles, s.src, s.p);
    for (int l = 0; l < 16; ++l) EXPECT_LE(max_rel(f.res[l], o.res[l]), 1e-8) << "l = " << l;
    // The extra analytic columns leave exact data unchanged.
    const Residues fa = residues_fit(s.basis, d.p, d.r, s.poles, s.src, s.p, {true, true});
    for (int l = 0; l < 16; ++l) EXPECT_LE(max_rel(fa.res[l], o.res[l]), 1e-6) << "l = " << l;
}

TEST(Reconstruct, SingleModeDataHasSingleResidue) {
    Roundtrip s(12, 48, 0.5);
    std::mt19937_64 rng(24);
    LinInput in = random_input(12, 48, rng);
    const int l0 = 5;
    for (int j = 0; j < 12; ++j) {
        if (j == l0) continue;
        in.a_sigma(j) = in.a_eta(j) = 0.0;
        for (auto& f : in.u) f.c.row(j).setZero();
    }
    const LinData d = linearized_forward(s.basis, in, s.src, s.p);
    const Residues f = residues_fit(s.basis, d.p, d.r, s.poles, s.src, s.p);
    const double peak = f.res[l0].cwiseAbs().maxCoeff();
    EXPECT_GT(peak, 0.0);
    for (int l = 0; l < 12; ++l)
        if (l != l0) EXPECT_LE(f.res[l].cwiseAbs().maxCoeff(), 1e-10 * peak) << "l = " << l;
}

TEST(Reconstruct, ResiduesLieInTraceSpace) {
    DomainSpec dom;
    dom.Lx = pi;
    dom.gamma = {1, 1, 0, 0};
    dom.sigma = {{0.0, 0.0}, {0.4, 0.0}, {2.2, 0.0}};
    dom.J = 10;
    const Basis b = build_basis(dom);
    ModelParams p;
    const SourcePair src = pulse_source(40, p);
    const PoleSet poles = compute_poles(b.lambda, p);
    std::mt19937_64 rng(25);
    const LinInput in = random_input(10, 40, rng);
    const LinData d = linearized_forward(b, in, src, p);
    const Residues f = residues_fit(b, d.p, d.r, poles, src, p);
    for (int l = 0; l < 10; ++l) {
        const VecC t = b.trace.col(l).cast<cd>();
        for (int q = 0; q < 2; ++q) {
            const VecC v = f.res[l].row(q).transpose();
            const VecC perp = v - t * (t.dot(v) / t.squaredNorm());
            EXPECT_LE(perp.norm(), 1e-10 * std::max(v.norm(), 1e-300));
        }
    }
}

TEST(Reconstruct, StateFormula) {
    Roundtrip s(10, 30, 0.5);
    std::mt19937_64 rng(26);
    const LinInput in = random_input(10, 30, rng);
    const LinData d = linearized_forward(s.basis, in, s.src, s.p);
    const FieldPair u = recover_state(s.basis, in.a_sigma, in.a_eta, d.r, s.src, s.p);
    for (int nu = 0; nu < 2; ++nu) EXPECT_LE(max_rel(u[nu].c, in.u[nu].c), 1e-11);

    // a = 0: b = r / symbol
    const VecC z = VecC::Zero(10);
    const FieldPair u0 = recover_state(s.basis, z, z, d.r, s.src, s.p);
    for (int j = 0; j < 10; ++j)
        for (int m = 1; m <= 30; ++m) {
            const cd expect = d.r[0](j, m) / harmonic_symbol(m, s.basis.lambda(j), s.p);
            EXPECT_LE(std::abs(u0[0](j, m) - expect), 1e-12 * std::abs(expect) + 1e-300);
        }

    // Source-consistent right-hand side cancels.
    LinInput nou = in;
    for (auto& f : nou.u) f.c.setZero();
    const LinData dn = linearized_forward(s.basis, nou, s.src, s.p);
    const FieldPair un = recover_state(s.basis, in.a_sigma, in.a_eta, dn.r, s.src, s.p);
    EXPECT_LE(un[0].c.cwiseAbs().maxCoeff() + un[1].c.cwiseAbs().maxCoeff(), 1e-12);

    // Zero data, zero states.
    FieldPair zr{HarmonicField(10, 30), HarmonicField(10, 30)};
    const FieldPair uz = recover_state(s.basis, z, z, zr, s.src, s.p);
    EXPECT_EQ(uz[0].c.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Reconstruct, HomogeneousModelUsesResidueTermOnly) {
    Roundtrip s(8, 32, 0.5);
    std::mt19937_64 rng(27);
    LinInput in = random_input(8, 32, rng);
    // Choose u so that r = 0: u_m = -frak_m a / symbol.
    for (int j = 0; j < 8; ++j)
        for (int m = 1; m <= 32; ++m) {
            const Eigen::Vector2cd fa = s.src.frak(m) * Eigen::Vector2cd(in.a_sigma(j), in.a_eta(j));
            const cd sym = harmonic_symbol(m, s.basis.lambda(j), s.p);
            in.u[0](j, m) = -fa(0) / sym;
            in.u[1](j, m) = -fa(1) / sym;
        }
    const LinData d = linearized_forward(s.basis, in, s.src, s.p);
    EXPECT_LE(d.r[0].c.cwiseAbs().maxCoeff(), 1e-12);
    const Reconstruction rec = reconstruct(s.basis, d, s.poles, s.src, s.p);
    for (int l = 0; l < 8; ++l) EXPECT_LE(rec.split.mod[l].norm(), 1e-12 * rec.split.obs[l].norm());
    EXPECT_LE(max_rel(rec.xi.a_sigma, in.a_sigma), 1e-8);
    EXPECT_LE(max_rel(rec.xi.a_eta, in.a_eta), 1e-8);
}

TEST(Reconstruct, ScaledRhsInterpolant) {
    Roundtrip s(6, 20, 0.5);
    std::mt19937_64 rng(28);
    const LinInput in = random_input(6, 20, rng);
    const LinData d = linearized_forward(s.basis, in, s.src, s.p);
    const double T = s.p.period();
    for (int l = 0; l < 6; ++l) {
        const cd o = s.poles.p(l);
        const Eigen::Vector2cd a = rhs_interpolant(d.r, l, o, s.p.omega, false);
        const Eigen::Vector2cd b = rhs_interpolant(d.r, l, o, s.p.omega, true);
        EXPECT_LE((b - std::exp(o * T) * a).norm(), 1e-10 * b.norm());
    }
}

TEST(Reconstruct, SmoothFieldsThroughPipeline) {
    Roundtrip s(16, 64, 0.5);
    const ReferenceState ref = build_reference_state(s.basis, 0, s.src, s.p);
    VecR sig(s.basis.grid_size()), eta(s.basis.grid_size());
    for (int q = 0; q < s.basis.grid_size(); ++q) {
        const double x = s.basis.nodes(0, q);
        sig(q) = 0.3 * std::exp(-std::pow((x - 1.2) / 0.4, 2));
        eta(q) = 0.2 * std::cos(x);
    }
    std::mt19937_64 rng(29);
    const LinInput base = random_input(16, 64, rng);
    const LinInput in = input_from_fields(s.basis, ref, sig, eta, base.u);
    const LinData d = linearized_forward(s.basis, in, s.src, s.p);
    const Reconstruction rec = reconstruct(s.basis, d, s.poles, s.src, s.p);
    // Field on the grid from the recovered phi*sigma coefficients vs the projected truth.
    const VecC gs = s.basis.synth(rec.xi.a_sigma.real().eval()).cast<cd>();
    const VecC ts = s.basis.synth(in.a_sigma.real().eval()).cast<cd>();
    const double l2 = std::sqrt((gs - ts).cwiseAbs2().dot(s.basis.weights) / ts.cwiseAbs2().dot(s.basis.weights));
    EXPECT_LE(l2, 1e-8);
    EXPECT_LE(rec.xi.a_sigma.imag().cwiseAbs().maxCoeff(), 1e-8 * rec.xi.a_sigma.cwiseAbs().maxCoeff());
}
