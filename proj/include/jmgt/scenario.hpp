#pragma once

#include "jmgt/quasirev.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace jmgt {

// Parametric spatial field, sampled on the quadrature grid.
struct FieldSpec {
    std::string kind = "constant";  // constant | gaussian | modes
    double value = 0.0;             // constant level (also the offset of a gaussian)
    Point center;
    double width = 0.1;
    double amplitude = 0.0;
    std::vector<double> coeffs;     // modes: sum_j coeffs[j] phi_j

    VecR sample(const Basis& basis) const;
};

// Random state perturbation: complex normal with |c_jm| ~ amplitude m^-decay_m (j+1)^-decay_j.
struct StateSpec {
    double amplitude = 1.0;
    double decay_m = 2.5;
    double decay_j = 2.0;
};

struct Scenario {
    std::string name;
    std::string preset;
    std::uint64_t seed = 1;
    std::string output_dir;

    DomainSpec domain;
    ModelParams model;
    double period = 0.0;  // optional echo of T; 0 when absent
    NormSpec norms;
    int J = 0;
    int M = 0;

    PulseSpec pulse;
    double A = 2.0;
    int ref_mode = 0;

    FieldSpec sigma;
    FieldSpec eta;
    StateSpec state;

    SolveOptions solver;
    int draws = 100;
    std::vector<double> deltas;
    TauRule rule;
    int smoothing_Lmax = 0;
    double smoothing_tau_dp = 1.5;

    nlohmann::json raw;  // parsed document, for the manifest echo and the hash
};

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"basis-report",         "forward-solve",   "pole-report",
                                                "linearized-roundtrip", "stability-probe", "qr-sweep",
                                                "smoothing-study"};
    return names;
}

// Structural parse; throws ValidationError naming the offending field.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);

// Semantic checks without computing; empty when the scenario is admissible.
std::vector<std::string> validate_scenario(const Scenario& sc);

// FNV-1a of the canonical JSON dump (output_dir excluded), 16 hex digits.
std::string scenario_hash(const Scenario& sc);

struct Table {
    std::string file;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct RunOutput {
    std::vector<Table> tables;
    nlohmann::json summary;
};

std::string fmt_num(double v);

RunOutput run_preset(const Scenario& sc);

// CSV files (first column is the scenario hash) plus manifest.json.
void write_outputs(const Scenario& sc, const RunOutput& out, const std::string& dir);

}  // namespace jmgt
