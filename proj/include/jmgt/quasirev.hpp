#pragma once

#include "jmgt/norms.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace jmgt {

// Stability constants as functions of the regularizing tau (C0 = C1 = 1 by default).
double log_Cbar(const ModelParams& p, double T0, double sigma_check, double C0 = 1.0);
double log_Ctilde(const ModelParams& p, double T0, double sigma_check, double C1 = 1.0);
double compute_Cbar(const ModelParams& p, double T0, double sigma_check, double C0 = 1.0);
double compute_Ctilde(const ModelParams& p, double T0, double sigma_check, double C1 = 1.0);

// Geometric grid tau0 + tau_min .. tau_max with ratio 2^{1/4}, increasing.
std::vector<double> tau_grid(double tau0, double tau_min, double tau_max);

struct TauRule {
    double tau0 = 0.0;
    double tau_min = 1e-6;
    double tau_max = 0.9;
    double kappa = 1.0;  // scale in max{Cbar, Ctilde} sqrt(delta) <= kappa
    double C0 = 1.0;
    double C1 = 1.0;
};

// Smallest grid tau with max{Cbar, Ctilde}(tau) sqrt(delta) <= kappa.
double choose_tau(double delta, const ModelParams& base, double T0, double sigma_check, const TauRule& rule);

struct NoisyData {
    LinData data;
    FieldPair noise;  // extension of the perturbation, in the span of retained (m, l)
    double delta = 0.0;
};

NoisyData add_noise(const Basis& basis, const LinData& clean, double omega, double delta, double s,
                    std::mt19937_64& rng);

// Least squares in V_L = span{phi_1..phi_L} against trace samples, L chosen by the discrepancy principle.
struct SmoothResult {
    int L = 0;
    VecR coeffs;                 // length L
    std::vector<double> kappa;   // kappa_L for L = 1..Lmax
    std::vector<double> resid;   // discrepancy ||tr v_L - data|| for L = 1..Lmax
};

SmoothResult smooth_data(const Basis& basis, const VecR& data, double delta_tilde, int Lmax, double s,
                         double tau_dp = 1.5);
double kappa_L(const Basis& basis, int L, double s);

struct SweepConfig {
    std::vector<double> deltas{1e-2, 1e-3, 1e-4};
    double T0 = 0.0;  // 0 means T
    double sigma_check = 0.5;
    double s = 1.0;
    TauRule rule;
    std::uint64_t seed = 1;
};

struct SweepRow {
    double delta = 0.0;
    double tau = 0.0;
    double error_X = 0.0;
    double bound = 0.0;
    double Cbar = 0.0;
    double Ctilde = 0.0;
    std::string status;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double calibration = 0.0;
    double dtu_norm = 0.0;
    double truth_norm = 0.0;
};

// Data from the tau0 model, reconstruction with tau(delta) > tau0. The bound constant is
// calibrated once on the noiseless reconstruction at tau(max delta).
SweepResult run_sweep(const Basis& basis, const SourcePair& src, const ModelParams& truth_params,
                      const LinInput& truth, const SweepConfig& cfg);

}  // namespace jmgt
