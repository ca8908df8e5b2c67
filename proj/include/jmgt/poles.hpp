#pragma once

#include "jmgt/types.hpp"

#include <vector>

namespace jmgt {

// Roots of tau p^3 + sigma0 p^2 + beta lambda p + lambda (two roots when tau = 0).
std::vector<cd> char_roots(double lambda, const ModelParams& p);

// Large-lambda expansion of the oscillatory root; throws when the radicand is not negative.
cd pole_asymptotic(double lambda, const ModelParams& p);

// Root with positive imaginary part; throws if all roots are real.
cd select_pole(double lambda, const ModelParams& p);

struct PoleSet {
    VecR lambda;
    VecC p;
    std::vector<bool> real_fallback;  // no oscillatory root: least damped real root used
    int fallback_count() const;
};

PoleSet compute_poles(const VecR& lambda, const ModelParams& p);

struct PoleBoundFit {
    double C = 0.0;
    double max_real = 0.0;      // max Re p over all roots
    double worst_real_slack = 0.0;
    double worst_modulus_slack = 0.0;
};

// Smallest C with -Re p <= (alpha/tau)(1 + C/lambda) and
// |(|p| / sqrt(beta lambda/tau)) - 1| <= C alpha / lambda over the given eigenvalues.
double fit_pole_constant(const VecR& lambda, const ModelParams& p);
// Slacks of both bounds at a given C (negative means violated).
PoleBoundFit check_pole_bounds(const VecR& lambda, const ModelParams& p, double C);

}  // namespace jmgt
