#pragma once

#include "jmgt/types.hpp"

#include <utility>
#include <vector>

namespace jmgt {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

enum class DomainKind { Interval, Rectangle };

struct DomainSpec {
    DomainKind kind = DomainKind::Interval;
    double Lx = 1.0;
    double Ly = 1.0;
    // Robin coefficients on x=0, x=Lx, y=0, y=Ly (all zero: Neumann).
    std::array<double, 4> gamma{0.0, 0.0, 0.0, 0.0};
    // Observation points in the closed domain, with optional quadrature weights.
    std::vector<Point> sigma;
    std::vector<double> sigma_weights;
    int J = 16;
    int oversample = 4;

    void validate() const;
};

// phi(x) = c (k cos(kx) + g0 sin(kx)); k = 0 is the constant Neumann mode.
struct Mode1D {
    double k = 0.0;
    double g0 = 0.0;
    double c = 1.0;

    double lambda() const { return k * k; }
    double value(double x) const;
    double deriv(double x) const;
};

// Positive roots of the Robin secular equation on [0, L], in increasing order.
std::vector<double> robin_wavenumbers(double L, double g0, double g1, int count);
std::vector<Mode1D> robin_modes(double L, double g0, double g1, int count);

void gauss_legendre(int n, double a, double b, VecR& x, VecR& w);

std::vector<Point> sample_segment(Point a, Point b, int n, std::vector<double>* weights = nullptr);

struct Basis {
    DomainSpec domain;
    VecR lambda;
    std::vector<std::pair<int, int>> index;
    std::vector<Mode1D> xmodes;
    std::vector<Mode1D> ymodes;
    MatR nodes;   // 2 x Nq
    VecR weights;
    MatR phi;     // Nq x J
    MatR phiw;    // J x Nq, phi^T diag(w)
    MatR trace;   // Ns x J
    VecR sigma_w;

    int size() const { return static_cast<int>(lambda.size()); }
    int grid_size() const { return static_cast<int>(weights.size()); }
    int sigma_size() const { return static_cast<int>(trace.rows()); }

    double eval(int j, Point p) const;
    // Outward normal derivative at a boundary point (zero if p is interior).
    double normal_derivative(int j, Point p) const;

    VecR project(const VecR& f) const { return phiw * f; }
    VecC project(const VecC& f) const { return phiw.cast<cd>() * f; }
    MatC project(const MatC& F) const { return phiw.cast<cd>() * F; }
    VecR synth(const VecR& c) const { return phi * c; }
    MatC synth(const MatC& C) const { return phi.cast<cd>() * C; }
};

Basis build_basis(const DomainSpec& spec);

MatR gram_matrix(const Basis& basis);

// Rank of tr_Sigma on each eigenspace; throws if some eigenspace has trivial trace.
std::vector<int> trace_rank(const Basis& basis, double tol = 1e-10);

// Weighted least-squares inverse of the restricted trace on eigenspace l.
cd trace_inverse(const VecC& v, const Basis& basis, int l);

}  // namespace jmgt
