#pragma once

#include "jmgt/quasirev.hpp"

#include <cmath>
#include <random>

namespace jmgt::test {

// Interval [0, pi], Robin coefficient 1 at both ends, observed at x = 0.
inline Basis interval_basis(int J, std::vector<Point> sigma = {{0.0, 0.0}}, std::array<double, 4> g = {1, 1, 0, 0}) {
    DomainSpec d;
    d.Lx = pi;
    d.gamma = g;
    d.sigma = std::move(sigma);
    d.J = J;
    return build_basis(d);
}

inline SourcePair pulse_source(int M, const ModelParams& p, double T0_frac = 0.75, double width = 0.05,
                               double A = 2.0) {
    const VecC psi = design_delta_pulse({T0_frac * p.period(), width}, M, p.omega);
    return amplitude_modulation(psi, A, p.omega);
}

inline LinInput random_input(int J, int M, std::mt19937_64& rng, double decay_m = 2.0, double decay_j = 0.0) {
    std::normal_distribution<double> N(0.0, 1.0);
    LinInput in;
    in.a_sigma.resize(J);
    in.a_eta.resize(J);
    for (int j = 0; j < J; ++j) {
        in.a_sigma(j) = cd(N(rng), N(rng)) * std::pow(j + 1.0, -decay_j);
        in.a_eta(j) = cd(N(rng), N(rng)) * std::pow(j + 1.0, -decay_j);
    }
    for (auto& f : in.u) {
        f = HarmonicField(J, M);
        for (int j = 0; j < J; ++j)
            for (int m = 1; m <= M; ++m) f(j, m) = cd(N(rng), N(rng)) * std::pow(m, -decay_m) * std::pow(j + 1.0, -decay_j);
    }
    return in;
}

inline double max_rel(const VecC& x, const VecC& ref) {
    return (x - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
}

inline double max_rel(const MatC& x, const MatC& ref) {
    return (x - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
}

inline LinInput difference(const LinInput& a, const LinInput& b) {
    LinInput d;
    d.a_sigma = a.a_sigma - b.a_sigma;
    d.a_eta = a.a_eta - b.a_eta;
    for (int nu = 0; nu < 2; ++nu) d.u[nu] = HarmonicField(a.u[nu].c - b.u[nu].c);
    return d;
}

// Time samples of Re sum_m c_m e^{i m omega t} at n equispaced points.
inline VecR synth_time(const VecC& c, double omega, int n) {
    const double T = 2.0 * pi / omega;
    VecR v(n);
    for (int k = 0; k < n; ++k) {
        cd acc = 0.0;
        const double t = T * k / n;
        for (int m = 1; m <= c.size(); ++m) acc += c(m - 1) * std::exp(cd(0.0, m * omega * t));
        v(k) = acc.real();
    }
    return v;
}

}  // namespace jmgt::test
