#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace jmgt {

using cd = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;
using MatR = Eigen::MatrixXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cd I{0.0, 1.0};

// Bad input (CLI exit code 2).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical breakdown (CLI exit code 3).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelParams {
    double tau = 0.5;
    double sigma0 = 1.0;
    double beta = 1.0;
    double omega = 1.0;
    double eta0 = 0.0;

    double period() const { return 2.0 * pi / omega; }
    // Damping rate numerator (sigma0*beta - tau)/(2 beta).
    double alpha() const { return (sigma0 * beta - tau) / (2.0 * beta); }
    void validate() const;
};

// Spectral coefficients of a time-periodic field: c(j, m-1) for mode j, harmonic m = 1..M.
struct HarmonicField {
    MatC c;

    HarmonicField() = default;
    HarmonicField(int J, int M) : c(MatC::Zero(J, M)) {}
    explicit HarmonicField(MatC coeffs) : c(std::move(coeffs)) {}

    int J() const { return static_cast<int>(c.rows()); }
    int M() const { return static_cast<int>(c.cols()); }
    cd& operator()(int j, int m) { return c(j, m - 1); }
    cd operator()(int j, int m) const { return c(j, m - 1); }
};

using FieldPair = std::array<HarmonicField, 2>;

// o_m = i m omega
inline cd lattice_point(int m, double omega) { return cd(0.0, m * omega); }

}  // namespace jmgt
