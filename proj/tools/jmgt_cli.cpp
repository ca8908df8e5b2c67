#include "jmgt/scenario.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiharmonic coefficient identification experiments"};
    app.require_subcommand(1);

    std::string file, out_dir;
    long long seed = -1;

    auto* run = app.add_subcommand("run", "Run the preset named in a scenario file");
    run->add_option("scenario", file, "Scenario file (JSON)")->required();
    run->add_option("--seed", seed, "Override the scenario seed")->check(CLI::NonNegativeNumber);
    run->add_option("--out", out_dir, "Override the output directory");

    auto* val = app.add_subcommand("validate", "Check a scenario file without computing");
    val->add_option("scenario", file, "Scenario file (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    if (val->parsed()) {
        std::vector<std::string> issues;
        try {
            issues = jmgt::validate_scenario(jmgt::load_scenario(file));
        } catch (const jmgt::ValidationError& e) {
            issues.push_back(e.what());
        }
        for (const auto& s : issues) std::cout << "violation: " << s << '\n';
        if (issues.empty()) std::cout << "ok\n";
        return issues.empty() ? kOk : kValidation;
    }

    try {
        jmgt::Scenario sc = jmgt::load_scenario(file);
        if (seed >= 0) sc.seed = static_cast<std::uint64_t>(seed);
        if (!out_dir.empty()) sc.output_dir = out_dir;
        const auto issues = jmgt::validate_scenario(sc);
        if (!issues.empty()) {
            for (const auto& s : issues) std::cerr << "validation error: " << s << '\n';
            return kValidation;
        }
        const jmgt::RunOutput out = jmgt::run_preset(sc);
        jmgt::write_outputs(sc, out, sc.output_dir);
        std::cout << sc.preset << " [" << jmgt::scenario_hash(sc) << "] -> " << sc.output_dir << '\n'
                  << out.summary.dump(2) << '\n';
    } catch (const jmgt::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const jmgt::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
    return kOk;
}
