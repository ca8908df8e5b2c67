#pragma once

#include "jmgt/forward.hpp"
#include "jmgt/poles.hpp"
#include "jmgt/sources.hpp"
#include "jmgt/spectral.hpp"

#include <vector>

namespace jmgt {

// Residues of the observation interpolant at p_l times e^{p_l T}: res[l] is 2 x Ns
// (signal x observation point). All interpolants at poles carry the same factor.
struct Residues {
    std::vector<MatC> res;
};

enum class ResidueMode { Oracle, Fit };

struct FitOptions {
    bool analytic_part = false;  // extra columns 1, 1/o, 1/o^2
    bool data_units = true;      // row weights 1 / (|Theta| ||frak^-1||)
};

// Interpolant of the model right-hand side on eigenspace l at o, for both signals.
Eigen::Vector2cd rhs_interpolant(const FieldPair& r, int l, cd o, double omega, bool scaled = false);

// Theta(p) Psi'(p) / p^2
cd residue_weight(cd p, const ModelParams& params);

Residues residues_oracle(const Basis& basis, const LinInput& truth, const FieldPair& r, const PoleSet& poles,
                         const SourcePair& src, const ModelParams& params);

Residues residues_fit(const Basis& basis, const std::array<MatC, 2>& p, const FieldPair& r, const PoleSet& poles,
                      const SourcePair& src, const ModelParams& params, const FitOptions& opt = {});

// a^l = kappa(p_l) Tr^{-1}[Mt(p_l)^{-1} res_l] + Mt(p_l)^{-1} rt^l(p_l), split into both parts.
struct CoefficientSplit {
    std::vector<Eigen::Vector2cd> obs;
    std::vector<Eigen::Vector2cd> mod;
};

CoefficientSplit split_coefficients(const Basis& basis, const Residues& res, const FieldPair& r,
                                    const PoleSet& poles, const SourcePair& src, const ModelParams& params);

void recover_coefficients(const CoefficientSplit& split, VecC& a_sigma, VecC& a_eta);

FieldPair recover_state(const Basis& basis, const VecC& a_sigma, const VecC& a_eta, const FieldPair& r,
                        const SourcePair& src, const ModelParams& params);

struct Reconstruction {
    LinInput xi;
    Residues residues;
    CoefficientSplit split;
};

// Data-driven inversion of the linearized map (fit mode).
Reconstruction reconstruct(const Basis& basis, const LinData& data, const PoleSet& poles, const SourcePair& src,
                           const ModelParams& params, const FitOptions& opt = {});

// Same pipeline with residues from the spectral representation of a known input.
Reconstruction reconstruct_oracle(const Basis& basis, const LinInput& truth, const LinData& data,
                                  const PoleSet& poles, const SourcePair& src, const ModelParams& params);

}  // namespace jmgt
