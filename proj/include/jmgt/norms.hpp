#pragma once

#include "jmgt/reconstruct.hpp"

namespace jmgt {

struct NormSpec {
    double s = 1.0;            // spatial smoothness of the coefficients
    double sigma_check = 0.5;  // temporal smoothness of the state
};

// lambda^s with 0^0 = 1 and 0^s = 0 for s > 0.
double lambda_pow(double lambda, double s);

double hs_norm(const VecC& a, const VecR& lambda, double s);
// (sum_m |m omega|^{2 sigma} sum_j lambda_j^s |c_jm|^2)^{1/2}
double bochner_norm(const HarmonicField& u, const VecR& lambda, double omega, double sigma_t, double s);
double bochner_norm(const FieldPair& u, const VecR& lambda, double omega, double sigma_t, double s);

double X_norm(const Basis& basis, const LinInput& xi, double omega, const NormSpec& ns);

// Weight |o_m|^{4+2 sigma} lambda^{s - sigma} / |vartheta + Theta lambda|^2.
double state_weight(int m, double lambda, const ModelParams& p, const NormSpec& ns);

double Y_obs_norm(const Basis& basis, const CoefficientSplit& split, const SourcePair& src, const ModelParams& p,
                  const NormSpec& ns);
double Y_mod_norm(const Basis& basis, const CoefficientSplit& split, const FieldPair& r, const SourcePair& src,
                  const ModelParams& p, const NormSpec& ns);

// Harmonic W^{1,1}(0,T; H^{s+1}) surrogate of an extended observation field.
double Ytilde_obs_norm(const FieldPair& ext, const VecR& lambda, double omega, double s);

// (int_0^T e^{-y t} dt)^{-1}
double rho_T(double y, double T);

// |vartheta(o_m) + Theta(o_m) lambda|^2 lambda^chi and the matching constant C_chi.
double J_chi(int m, double lambda, double chi, const ModelParams& p);
double C_hat(double chi, const ModelParams& p);
// C_chi (beta/tau)^chi - |o_m|^{4+2chi} / J_chi; nonnegative when the bound holds.
double J_bound_slack(int m, double lambda, double chi, const ModelParams& p);

}  // namespace jmgt
