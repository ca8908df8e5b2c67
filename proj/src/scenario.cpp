#include "jmgt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>

namespace jmgt {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- parsing

const json& member(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw ValidationError(path + ": expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(path + "." + key + ": missing");
    return *it;
}

double get_num(const json& obj, const std::string& key, const std::string& path) {
    const json& v = member(obj, key, path);
    if (!v.is_number()) throw ValidationError(path + "." + key + ": expected a number");
    return v.get<double>();
}

double opt_num(const json& obj, const std::string& key, const std::string& path, double fallback) {
    if (!obj.contains(key)) return fallback;
    return get_num(obj, key, path);
}

int get_int(const json& obj, const std::string& key, const std::string& path) {
    const json& v = member(obj, key, path);
    if (!v.is_number_integer()) throw ValidationError(path + "." + key + ": expected an integer");
    return v.get<int>();
}

int opt_int(const json& obj, const std::string& key, const std::string& path, int fallback) {
    if (!obj.contains(key)) return fallback;
    return get_int(obj, key, path);
}

std::string get_str(const json& obj, const std::string& key, const std::string& path) {
    const json& v = member(obj, key, path);
    if (!v.is_string()) throw ValidationError(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

std::vector<double> get_nums(const json& obj, const std::string& key, const std::string& path) {
    const json& v = member(obj, key, path);
    if (!v.is_array()) throw ValidationError(path + "." + key + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ValidationError(path + "." + key + ": expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

Point get_point(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() < 1 || v.size() > 2 || !v[0].is_number() || (v.size() == 2 && !v[1].is_number()))
        throw ValidationError(path + ": expected [x] or [x, y]");
    return {v[0].get<double>(), v.size() == 2 ? v[1].get<double>() : 0.0};
}

FieldSpec parse_field(const json& obj, const std::string& path) {
    FieldSpec f;
    f.kind = get_str(obj, "kind", path);
    if (f.kind == "constant") {
        f.value = get_num(obj, "value", path);
    } else if (f.kind == "gaussian") {
        f.value = opt_num(obj, "value", path, 0.0);
        f.amplitude = get_num(obj, "amplitude", path);
        f.width = get_num(obj, "width", path);
        f.center = get_point(member(obj, "center", path), path + ".center");
    } else if (f.kind == "modes") {
        f.coeffs = get_nums(obj, "coeffs", path);
    } else {
        throw ValidationError(path + ".kind: unknown field kind '" + f.kind + "' (constant, gaussian, modes)");
    }
    return f;
}

DomainSpec parse_domain(const json& obj) {
    const std::string path = "domain";
    DomainSpec d;
    const std::string kind = get_str(obj, "kind", path);
    if (kind == "interval") {
        d.kind = DomainKind::Interval;
    } else if (kind == "rectangle") {
        d.kind = DomainKind::Rectangle;
        d.Ly = get_num(obj, "Ly", path);
    } else {
        throw ValidationError("domain.kind: expected 'interval' or 'rectangle'");
    }
    d.Lx = get_num(obj, "Lx", path);
    const auto g = get_nums(obj, "gamma", path);
    const size_t ng = d.kind == DomainKind::Interval ? 2 : 4;
    if (g.size() != ng) throw ValidationError("domain.gamma: expected " + std::to_string(ng) + " Robin coefficients");
    for (size_t i = 0; i < ng; ++i) d.gamma[i] = g[i];
    d.oversample = opt_int(obj, "oversample", path, 4);

    const json& ob = member(obj, "observation", path);
    const std::string op = "domain.observation";
    if (ob.contains("points")) {
        const json& pts = ob["points"];
        if (!pts.is_array()) throw ValidationError(op + ".points: expected an array of points");
        for (size_t i = 0; i < pts.size(); ++i)
            d.sigma.push_back(get_point(pts[i], op + ".points[" + std::to_string(i) + "]"));
        if (ob.contains("weights")) d.sigma_weights = get_nums(ob, "weights", op);
    } else if (ob.contains("segments")) {
        const json& segs = ob["segments"];
        if (!segs.is_array() || segs.empty()) throw ValidationError(op + ".segments: expected a nonempty array");
        for (size_t i = 0; i < segs.size(); ++i) {
            const std::string sp = op + ".segments[" + std::to_string(i) + "]";
            const Point a = get_point(member(segs[i], "from", sp), sp + ".from");
            const Point b = get_point(member(segs[i], "to", sp), sp + ".to");
            const int n = get_int(segs[i], "n", sp);
            if (n < 1) throw ValidationError(sp + ".n: must be positive");
            std::vector<double> w;
            const auto pts = sample_segment(a, b, n, &w);
            d.sigma.insert(d.sigma.end(), pts.begin(), pts.end());
            d.sigma_weights.insert(d.sigma_weights.end(), w.begin(), w.end());
        }
    } else {
        throw ValidationError(op + ": expected 'points' or 'segments'");
    }
    return d;
}

// ---------------------------------------------------------------- formatting

std::string fmt_int(long long v) { return std::to_string(v); }

std::string fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Rethrow numerical failures with the stage that produced them.
template <class F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(name) + ": " + e.what());
    }
}

// ---------------------------------------------------------------- shared setup

struct Setup {
    Basis basis;
    SourcePair src;
};

Setup make_setup(const Scenario& sc) {
    DomainSpec d = sc.domain;
    d.J = sc.J;
    Setup s{stage("spectral", [&] { return build_basis(d); }), {}};
    s.src = amplitude_modulation(design_delta_pulse(sc.pulse, sc.M, sc.model.omega), sc.A, sc.model.omega);
    return s;
}

FieldPair random_state(const Scenario& sc, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    FieldPair u;
    for (auto& f : u) {
        f = HarmonicField(sc.J, sc.M);
        for (int m = 1; m <= sc.M; ++m)
            for (int j = 0; j < sc.J; ++j) {
                const double w = sc.state.amplitude * std::pow(m, -sc.state.decay_m) * std::pow(j + 1.0, -sc.state.decay_j);
                f(j, m) = w * cd(N(rng), N(rng));
            }
    }
    return u;
}

LinInput truth_input(const Scenario& sc, const Setup& s, std::mt19937_64& rng) {
    const ReferenceState ref = build_reference_state(s.basis, sc.ref_mode, s.src, sc.model);
    return input_from_fields(s.basis, ref, sc.sigma.sample(s.basis), sc.eta.sample(s.basis), random_state(sc, rng));
}

double max_rel(const VecC& x, const VecC& ref) {
    const double n = ref.cwiseAbs().maxCoeff();
    return (x - ref).cwiseAbs().maxCoeff() / (n > 0.0 ? n : 1.0);
}

double max_rel(const MatC& x, const MatC& ref) {
    const double n = ref.cwiseAbs().maxCoeff();
    return (x - ref).cwiseAbs().maxCoeff() / (n > 0.0 ? n : 1.0);
}

double input_error(const LinInput& x, const LinInput& ref) {
    double e = std::max(max_rel(x.a_sigma, ref.a_sigma), max_rel(x.a_eta, ref.a_eta));
    for (int nu = 0; nu < 2; ++nu) e = std::max(e, max_rel(x.u[nu].c, ref.u[nu].c));
    return e;
}

// ---------------------------------------------------------------- presets

RunOutput basis_report(const Scenario& sc) {
    DomainSpec d = sc.domain;
    d.J = sc.J;
    const Basis b = stage("spectral", [&] { return build_basis(d); });
    const MatR G = gram_matrix(b);
    const auto rank = trace_rank(b);
    Table t{"basis.csv", {"j", "lambda", "ix", "iy", "trace_norm", "trace_rank"}, {}};
    for (int j = 0; j < b.size(); ++j)
        t.rows.push_back({fmt_int(j), fmt_num(b.lambda(j)), fmt_int(b.index[j].first), fmt_int(b.index[j].second),
                          fmt_num(b.trace.col(j).norm()), fmt_int(rank[j])});
    RunOutput out;
    out.tables.push_back(std::move(t));
    out.summary["gram_error"] = (G - MatR::Identity(b.size(), b.size())).cwiseAbs().maxCoeff();
    out.summary["lambda_min"] = b.lambda.minCoeff();
    out.summary["lambda_max"] = b.lambda.maxCoeff();
    out.summary["quadrature_nodes"] = b.grid_size();
    return out;
}

RunOutput forward_solve(const Scenario& sc) {
    const Setup s = make_setup(sc);
    const ReferenceState ref = build_reference_state(s.basis, sc.ref_mode, s.src, sc.model);
    const VecR sig = (sc.sigma.sample(s.basis).array() + sc.model.sigma0).matrix();
    const VecR eta = (sc.eta.sample(s.basis).array() + sc.model.eta0).matrix();
    const VecR sig0 = VecR::Constant(s.basis.grid_size(), sc.model.sigma0);
    const VecR zero = VecR::Zero(s.basis.grid_size());

    Table t{"harmonics.csv", {"nu", "m", "norm_u", "norm_r"}, {}};
    double res_max = 0.0, diag_err = 0.0;
    json solves = json::array();
    for (int nu = 0; nu < 2; ++nu) {
        const SolveResult r = stage("forward", [&] {
            return solve_multiharmonic(s.basis, ref.source[nu], sig, eta, sc.model, sc.solver);
        });
        res_max = std::max(res_max, r.residual);
        solves.push_back({{"nu", nu + 1}, {"residual", r.residual}, {"iterations", r.iterations}, {"damping", r.damping}});
        for (int m = 1; m <= sc.M; ++m)
            t.rows.push_back({fmt_int(nu + 1), fmt_int(m), fmt_num(r.u.c.col(m - 1).norm()),
                              fmt_num(ref.source[nu].c.col(m - 1).norm())});
        // Linear constant-coefficient solve is diagonal; ref.u0 is its exact solution.
        const SolveResult lin = solve_multiharmonic(s.basis, ref.source[nu], sig0, zero, sc.model, sc.solver);
        diag_err = std::max(diag_err, max_rel(lin.u.c, ref.u0[nu].c));
    }
    RunOutput out;
    out.tables.push_back(std::move(t));
    out.summary["residual_max"] = res_max;
    out.summary["solves"] = solves;
    out.summary["linear_diagonal_error"] = diag_err;
    return out;
}

RunOutput pole_report(const Scenario& sc) {
    DomainSpec d = sc.domain;
    d.J = sc.J;
    const Basis b = stage("spectral", [&] { return build_basis(d); });
    const PoleSet ps = stage("poles", [&] { return compute_poles(b.lambda, sc.model); });
    Table t{"poles.csv", {"l", "lambda", "re_p", "im_p", "re_asym", "im_asym", "rel_err_asym", "real_fallback"}, {}};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double max_real = -std::numeric_limits<double>::infinity();
    for (int l = 0; l < b.size(); ++l) {
        for (const auto& z : char_roots(b.lambda(l), sc.model)) max_real = std::max(max_real, z.real());
        cd pa(nan, nan);
        double err = nan;
        if (sc.model.tau > 0.0) {
            try {
                pa = pole_asymptotic(b.lambda(l), sc.model);
                err = std::abs(ps.p(l) - pa) / std::abs(ps.p(l));
            } catch (const NumericalError&) {
            }
        }
        t.rows.push_back({fmt_int(l), fmt_num(b.lambda(l)), fmt_num(ps.p(l).real()), fmt_num(ps.p(l).imag()),
                          fmt_num(pa.real()), fmt_num(pa.imag()), fmt_num(err), fmt_int(ps.real_fallback[l])});
    }
    RunOutput out;
    out.tables.push_back(std::move(t));
    out.summary["max_real_part"] = max_real;
    out.summary["real_fallbacks"] = ps.fallback_count();
    if (sc.model.tau > 0.0) {
        const double C = fit_pole_constant(b.lambda, sc.model);
        const PoleBoundFit f = check_pole_bounds(b.lambda, sc.model, C);
        out.summary["C"] = C;
        out.summary["real_slack"] = f.worst_real_slack;
        out.summary["modulus_slack"] = f.worst_modulus_slack;
    }
    return out;
}

RunOutput linearized_roundtrip(const Scenario& sc) {
    const Setup s = make_setup(sc);
    std::mt19937_64 rng(sc.seed);
    const LinInput truth = truth_input(sc, s, rng);
    const PoleSet poles = stage("poles", [&] { return compute_poles(s.basis.lambda, sc.model); });
    const LinData data = linearized_forward(s.basis, truth, s.src, sc.model);
    const Reconstruction ro =
        stage("reconstruct", [&] { return reconstruct_oracle(s.basis, truth, data, poles, s.src, sc.model); });
    const Reconstruction rf = stage("reconstruct", [&] { return reconstruct(s.basis, data, poles, s.src, sc.model); });

    Table t{"coefficients.csv",
            {"l", "lambda", "abs_a_sigma", "abs_a_eta", "err_a_sigma_oracle", "err_a_eta_oracle", "err_a_sigma_fit",
             "err_a_eta_fit"},
            {}};
    for (int l = 0; l < s.basis.size(); ++l)
        t.rows.push_back({fmt_int(l), fmt_num(s.basis.lambda(l)), fmt_num(std::abs(truth.a_sigma(l))),
                          fmt_num(std::abs(truth.a_eta(l))), fmt_num(std::abs(ro.xi.a_sigma(l) - truth.a_sigma(l))),
                          fmt_num(std::abs(ro.xi.a_eta(l) - truth.a_eta(l))),
                          fmt_num(std::abs(rf.xi.a_sigma(l) - truth.a_sigma(l))),
                          fmt_num(std::abs(rf.xi.a_eta(l) - truth.a_eta(l)))});
    double res_diff = 0.0;
    for (int l = 0; l < s.basis.size(); ++l)
        res_diff = std::max(res_diff, max_rel(rf.residues.res[l], ro.residues.res[l]));
    RunOutput out;
    out.tables.push_back(std::move(t));
    out.summary["max_rel_error_oracle"] = input_error(ro.xi, truth);
    out.summary["max_rel_error_fit"] = input_error(rf.xi, truth);
    out.summary["residue_fit_vs_oracle"] = res_diff;
    out.summary["real_fallbacks"] = poles.fallback_count();
    return out;
}

RunOutput stability_probe(const Scenario& sc) {
    const Setup s = make_setup(sc);
    const PoleSet poles = stage("poles", [&] { return compute_poles(s.basis.lambda, sc.model); });
    std::mt19937_64 rng(sc.seed);
    std::normal_distribution<double> N(0.0, 1.0);
    Table t{"stability.csv", {"draw", "X", "Y_obs", "Y_mod", "Y", "slack"}, {}};
    double min_slack = std::numeric_limits<double>::infinity();
    int violations = 0;
    for (int k = 0; k < sc.draws; ++k) {
        LinInput in;
        in.a_sigma.resize(sc.J);
        in.a_eta.resize(sc.J);
        for (int j = 0; j < sc.J; ++j) {
            const double w = sc.state.amplitude * std::pow(j + 1.0, -sc.state.decay_j);
            in.a_sigma(j) = w * N(rng);
            in.a_eta(j) = w * N(rng);
        }
        in.u = random_state(sc, rng);
        const LinData data = linearized_forward(s.basis, in, s.src, sc.model);
        const Reconstruction ro =
            stage("reconstruct", [&] { return reconstruct_oracle(s.basis, in, data, poles, s.src, sc.model); });
        const double X = X_norm(s.basis, in, sc.model.omega, sc.norms);
        const double Yo = Y_obs_norm(s.basis, ro.split, s.src, sc.model, sc.norms);
        const double Ym = Y_mod_norm(s.basis, ro.split, data.r, s.src, sc.model, sc.norms);
        const double Y = std::hypot(Yo, Ym);
        min_slack = std::min(min_slack, Y - X);
        if (Y - X < -1e-10 * std::max(1.0, X)) ++violations;
        t.rows.push_back({fmt_int(k), fmt_num(X), fmt_num(Yo), fmt_num(Ym), fmt_num(Y), fmt_num(Y - X)});
    }

    Table c{"constants.csv", {"tau", "Cbar", "Ctilde"}, {}};
    const double top = sc.model.sigma0 * sc.model.beta;
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 16; ++i) {
        ModelParams p = sc.model;
        p.tau = top * std::pow(1e-2, 1.0 - i / 15.0);
        const double cb = compute_Cbar(p, sc.pulse.T0, sc.norms.sigma_check, sc.rule.C0);
        const double ct = compute_Ctilde(p, sc.pulse.T0, sc.norms.sigma_check, sc.rule.C1);
        monotone = monotone && cb < prev;
        prev = cb;
        c.rows.push_back({fmt_num(p.tau), fmt_num(cb), fmt_num(ct)});
    }
    RunOutput out;
    out.tables.push_back(std::move(t));
    out.tables.push_back(std::move(c));
    out.summary["min_slack"] = min_slack;
    out.summary["violations"] = violations;
    out.summary["Cbar_strictly_decreasing"] = monotone;
    return out;
}

RunOutput qr_sweep(const Scenario& sc) {
    const Setup s = make_setup(sc);
    std::mt19937_64 rng(sc.seed);
    const LinInput truth = truth_input(sc, s, rng);
    SweepConfig cfg;
    cfg.deltas = sc.deltas;
    cfg.T0 = sc.pulse.T0;
    cfg.sigma_check = sc.norms.sigma_check;
    cfg.s = sc.norms.s;
    cfg.rule = sc.rule;
    cfg.rule.tau0 = sc.model.tau;
    cfg.seed = sc.seed;
    const SweepResult r = stage("quasirev", [&] { return run_sweep(s.basis, s.src, sc.model, truth, cfg); });

    Table t{"sweep.csv", {"delta", "tau", "error_X", "bound", "Cbar", "Ctilde", "status"}, {}};
    bool decreasing = true, bounded = true;
    for (size_t i = 0; i < r.rows.size(); ++i) {
        const SweepRow& row = r.rows[i];
        t.rows.push_back({fmt_num(row.delta), fmt_num(row.tau), fmt_num(row.error_X), fmt_num(row.bound),
                          fmt_num(row.Cbar), fmt_num(row.Ctilde), row.status});
        bounded = bounded && row.status == "ok";
        // rows ordered by decreasing delta are expected to have decreasing error
        for (size_t k = 0; k < r.rows.size(); ++k)
            if (r.rows[k].delta < row.delta && !(r.rows[k].error_X < row.error_X)) decreasing = false;
    }
    RunOutput out;
    out.tables.push_back(std::move(t));
    out.summary["calibration"] = r.calibration;
    out.summary["dtu_norm"] = r.dtu_norm;
    out.summary["truth_norm"] = r.truth_norm;
    out.summary["error_strictly_decreasing"] = decreasing;
    out.summary["all_within_bound"] = bounded;
    return out;
}

RunOutput smoothing_study(const Scenario& sc) {
    DomainSpec d = sc.domain;
    d.J = sc.J;
    const Basis b = stage("spectral", [&] { return build_basis(d); });
    const VecR target = b.project(sc.sigma.sample(b));
    const VecR clean = b.trace * target;
    const VecR sw = b.sigma_w.cwiseSqrt();
    const int Lmax = sc.smoothing_Lmax > 0 ? sc.smoothing_Lmax : sc.J;
    std::mt19937_64 rng(sc.seed);
    std::normal_distribution<double> N(0.0, 1.0);

    Table t{"smoothing.csv", {"delta", "L", "error_Hs", "kappa_L", "discrepancy"}, {}};
    std::vector<double> kappa;
    for (double dt : sc.deltas) {
        VecR noise(clean.size());
        for (int i = 0; i < noise.size(); ++i) noise(i) = N(rng);
        noise *= dt / sw.cwiseProduct(noise).norm();
        const SmoothResult r =
            stage("smoothing", [&] { return smooth_data(b, clean + noise, dt, Lmax, sc.norms.s, sc.smoothing_tau_dp); });
        double e = 0.0;
        for (int l = 0; l < b.size(); ++l) {
            const double c = l < r.L ? r.coeffs(l) : 0.0;
            e += lambda_pow(b.lambda(l), sc.norms.s) * (c - target(l)) * (c - target(l));
        }
        t.rows.push_back({fmt_num(dt), fmt_int(r.L), fmt_num(std::sqrt(e)), fmt_num(r.kappa[r.L - 1]),
                          fmt_num(r.resid[r.L - 1])});
        kappa = r.kappa;
    }
    Table k{"kappa.csv", {"L", "kappa_L"}, {}};
    bool monotone = true;
    for (size_t L = 0; L < kappa.size(); ++L) {
        k.rows.push_back({fmt_int(static_cast<long long>(L) + 1), fmt_num(kappa[L])});
        if (L > 0 && kappa[L] < kappa[L - 1] * (1.0 - 1e-12)) monotone = false;
    }
    RunOutput out;
    out.tables.push_back(std::move(t));
    out.tables.push_back(std::move(k));
    out.summary["kappa_monotone"] = monotone;
    out.summary["target_Hs_norm"] = hs_norm(target.cast<cd>(), b.lambda, sc.norms.s);
    return out;
}

}  // namespace

VecR FieldSpec::sample(const Basis& basis) const {
    const int nq = basis.grid_size();
    if (kind == "constant") return VecR::Constant(nq, value);
    if (kind == "gaussian") {
        VecR f(nq);
        for (int q = 0; q < nq; ++q) {
            const double dx = basis.nodes(0, q) - center.x, dy = basis.nodes(1, q) - center.y;
            f(q) = value + amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
        }
        return f;
    }
    if (kind == "modes") {
        if (static_cast<int>(coeffs.size()) > basis.size()) throw ValidationError("field references modes beyond J");
        VecR c = VecR::Zero(basis.size());
        for (size_t j = 0; j < coeffs.size(); ++j) c(j) = coeffs[j];
        return basis.synth(c);
    }
    throw ValidationError("unknown field kind '" + kind + "'");
}

std::string fmt_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Scenario parse_scenario(const json& doc) {
    Scenario sc;
    sc.raw = doc;
    sc.name = get_str(doc, "name", "scenario");
    sc.preset = get_str(doc, "preset", "scenario");
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
            throw ValidationError("scenario.seed: expected a nonnegative integer");
        sc.seed = doc["seed"].get<std::uint64_t>();
    }
    sc.output_dir = doc.contains("output_dir") ? get_str(doc, "output_dir", "scenario") : "out/" + sc.name;

    sc.domain = parse_domain(member(doc, "domain", "scenario"));

    const json& m = member(doc, "model", "scenario");
    sc.model.tau = get_num(m, "tau", "model");
    sc.model.sigma0 = get_num(m, "sigma0", "model");
    sc.model.beta = get_num(m, "beta", "model");
    sc.model.omega = get_num(m, "omega", "model");
    sc.model.eta0 = get_num(m, "eta0", "model");
    sc.period = opt_num(m, "period", "model", 0.0);

    const json& n = member(doc, "norms", "scenario");
    sc.norms.s = get_num(n, "s", "norms");
    sc.norms.sigma_check = get_num(n, "sigma_check", "norms");

    const json& t = member(doc, "truncation", "scenario");
    sc.J = get_int(t, "J", "truncation");
    sc.M = get_int(t, "M", "truncation");

    if (doc.contains("source")) {
        const json& s = doc["source"];
        const bool abs_t0 = s.contains("T0"), rel_t0 = s.contains("T0_over_T");
        if (abs_t0 == rel_t0) throw ValidationError("source: give exactly one of T0 and T0_over_T");
        sc.pulse.T0 = abs_t0 ? get_num(s, "T0", "source") : get_num(s, "T0_over_T", "source") * sc.model.period();
        sc.pulse.width = get_num(s, "width", "source");
        sc.A = get_num(s, "A", "source");
        sc.ref_mode = opt_int(s, "mode", "source", 0);
    } else {
        const std::string& p = sc.preset;
        if (p != "basis-report" && p != "pole-report" && p != "smoothing-study")
            throw ValidationError("scenario.source: missing");
    }

    if (doc.contains("truth")) {
        const json& tr = doc["truth"];
        if (tr.contains("sigma")) sc.sigma = parse_field(tr["sigma"], "truth.sigma");
        if (tr.contains("eta")) sc.eta = parse_field(tr["eta"], "truth.eta");
        if (tr.contains("state")) {
            const json& st = tr["state"];
            sc.state.amplitude = opt_num(st, "amplitude", "truth.state", sc.state.amplitude);
            sc.state.decay_m = opt_num(st, "decay_m", "truth.state", sc.state.decay_m);
            sc.state.decay_j = opt_num(st, "decay_j", "truth.state", sc.state.decay_j);
        }
    }
    if (doc.contains("solver")) {
        sc.solver.tol = opt_num(doc["solver"], "tol", "solver", sc.solver.tol);
        sc.solver.max_iter = opt_int(doc["solver"], "max_iter", "solver", sc.solver.max_iter);
    }
    if (doc.contains("stability")) sc.draws = opt_int(doc["stability"], "draws", "stability", sc.draws);
    if (doc.contains("quasirev")) {
        const json& q = doc["quasirev"];
        sc.deltas = get_nums(q, "deltas", "quasirev");
        sc.rule.tau_min = opt_num(q, "tau_min", "quasirev", sc.rule.tau_min);
        sc.rule.tau_max = opt_num(q, "tau_max", "quasirev", sc.rule.tau_max);
        sc.rule.kappa = opt_num(q, "kappa", "quasirev", sc.rule.kappa);
        sc.rule.C0 = opt_num(q, "C0", "quasirev", sc.rule.C0);
        sc.rule.C1 = opt_num(q, "C1", "quasirev", sc.rule.C1);
    }
    if (doc.contains("smoothing")) {
        const json& q = doc["smoothing"];
        sc.deltas = get_nums(q, "deltas", "smoothing");
        sc.smoothing_Lmax = opt_int(q, "Lmax", "smoothing", 0);
        sc.smoothing_tau_dp = opt_num(q, "tau_dp", "smoothing", sc.smoothing_tau_dp);
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read scenario file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("scenario file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_scenario(doc);
}

std::vector<std::string> validate_scenario(const Scenario& sc) {
    std::vector<std::string> v;
    const auto& names = preset_names();
    const std::string& p = sc.preset;
    if (std::find(names.begin(), names.end(), p) == names.end()) v.push_back("preset: unknown preset '" + p + "'");

    const ModelParams& m = sc.model;
    if (!(m.sigma0 > 0.0)) v.push_back("model.sigma0: must be positive");
    if (!(m.beta > 0.0)) v.push_back("model.beta: must be positive");
    if (!(m.omega > 0.0)) v.push_back("model.omega: must be positive");
    if (!(m.tau >= 0.0)) v.push_back("model.tau: must be nonnegative");
    if (m.tau > m.sigma0 * m.beta * (1.0 + 1e-14))
        v.push_back("model.tau: stability requirement sigma0*beta >= tau violated");
    if (sc.period != 0.0 && m.omega > 0.0 && std::abs(sc.period * m.omega - 2.0 * pi) > 1e-12 * 2.0 * pi)
        v.push_back("model.period: T*omega must equal 2*pi");
    if ((p == "linearized-roundtrip" || p == "stability-probe") && !(m.tau > 0.0))
        v.push_back("model.tau: pole reconstruction needs tau > 0");

    if (sc.J < 1) v.push_back("truncation.J: must be positive");
    if (sc.M < 1) v.push_back("truncation.M: must be positive");

    const DomainSpec& d = sc.domain;
    if (!(d.Lx > 0.0) || (d.kind == DomainKind::Rectangle && !(d.Ly > 0.0)))
        v.push_back("domain: lengths must be positive");
    for (double g : d.gamma)
        if (g < 0.0) v.push_back("domain.gamma: Robin coefficients must be nonnegative");
    if (d.oversample < 2) v.push_back("domain.oversample: must be at least 2");
    if (d.sigma.empty()) v.push_back("domain.observation: empty observation set");
    const double ly = d.kind == DomainKind::Rectangle ? d.Ly : 0.0;
    for (const auto& q : d.sigma)
        if (q.x < -1e-12 || q.x > d.Lx + 1e-12 || q.y < -1e-12 || q.y > ly + 1e-12) {
            v.push_back("domain.observation: point outside the domain");
            break;
        }

    if (!(sc.norms.s > 0.5)) v.push_back("norms.s: must exceed 1/2");
    if (!(sc.norms.sigma_check >= 0.0) || sc.norms.sigma_check > std::min(sc.norms.s, 1.0))
        v.push_back("norms.sigma_check: must lie in [0, min(s, 1)]");

    const bool has_source = p != "basis-report" && p != "pole-report" && p != "smoothing-study";
    if (has_source && m.omega > 0.0) {
        const double T = m.period();
        if (sc.A == 0.0 || sc.A == 1.0)
            v.push_back("source.A: amplitude ratio A must differ from 0 and 1 (source matrix singular)");
        if (!(sc.pulse.T0 > 0.0) || sc.pulse.T0 > T * (1.0 + 1e-14)) v.push_back("source.T0: must lie in (0, T]");
        if (!(sc.pulse.width > 0.0) || sc.pulse.width >= 0.5 * T) v.push_back("source.width: must lie in (0, T/2)");
        if (sc.M * m.omega * sc.pulse.width >= 2.0 * pi)
            v.push_back("source.width: M*omega*width must stay below 2*pi");
        if (sc.ref_mode < 0 || sc.ref_mode >= sc.J) v.push_back("source.mode: reference mode outside the truncation");
    }
    for (const auto* f : {&sc.sigma, &sc.eta})
        if (f->kind == "modes" && static_cast<int>(f->coeffs.size()) > sc.J)
            v.push_back(std::string("truth.") + (f == &sc.sigma ? "sigma" : "eta") + ": modes beyond the truncation");

    if ((p == "linearized-roundtrip" || p == "qr-sweep") && sc.M < sc.J)
        v.push_back("truncation.M: the residue fit needs M >= J");
    if (p == "stability-probe" && sc.draws < 1) v.push_back("stability.draws: must be positive");
    if (p == "qr-sweep") {
        if (sc.deltas.empty()) v.push_back("quasirev.deltas: missing or empty");
        for (double dl : sc.deltas)
            if (!(dl > 0.0)) {
                v.push_back("quasirev.deltas: noise levels must be positive");
                break;
            }
        if (!(sc.rule.kappa > 0.0)) v.push_back("quasirev.kappa: must be positive");
        if (!(sc.rule.tau_min > 0.0) || !(m.tau + sc.rule.tau_min < sc.rule.tau_max))
            v.push_back("quasirev: need 0 < tau_min and tau + tau_min < tau_max");
        if (sc.rule.tau_max > m.sigma0 * m.beta * (1.0 + 1e-14))
            v.push_back("quasirev.tau_max: stability requirement sigma0*beta >= tau violated");
        if (m.tau == 0.0 && m.omega > 0.0 &&
            (std::abs(sc.pulse.T0 - m.period()) > 1e-12 * m.period() || !(sc.norms.sigma_check < 1.0)))
            v.push_back("quasirev: tau0 = 0 needs source.T0 = T and norms.sigma_check < 1");
    }
    if (p == "smoothing-study") {
        if (sc.deltas.empty()) v.push_back("smoothing.deltas: missing or empty");
        for (double dl : sc.deltas)
            if (!(dl > 0.0)) {
                v.push_back("smoothing.deltas: noise levels must be positive");
                break;
            }
        if (sc.smoothing_Lmax < 0 || sc.smoothing_Lmax > sc.J) v.push_back("smoothing.Lmax: must lie in 1..J");
    }
    return v;
}

std::string scenario_hash(const Scenario& sc) {
    json doc = sc.raw;
    doc.erase("output_dir");
    doc["seed"] = sc.seed;
    return fnv1a(doc.dump());
}

RunOutput run_preset(const Scenario& sc) {
    const auto bad = validate_scenario(sc);
    if (!bad.empty()) throw ValidationError(bad.front());
    static const std::vector<std::pair<std::string, std::function<RunOutput(const Scenario&)>>> table{
        {"basis-report", basis_report},
        {"forward-solve", forward_solve},
        {"pole-report", pole_report},
        {"linearized-roundtrip", linearized_roundtrip},
        {"stability-probe", stability_probe},
        {"qr-sweep", qr_sweep},
        {"smoothing-study", smoothing_study},
    };
    for (const auto& [name, fn] : table)
        if (name == sc.preset) return fn(sc);
    throw ValidationError("preset: unknown preset '" + sc.preset + "'");
}

void write_outputs(const Scenario& sc, const RunOutput& out, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::string hash = scenario_hash(sc);
    json files = json::array();
    for (const Table& t : out.tables) {
        std::ofstream f(fs::path(dir) / t.file, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / t.file).string());
        f << "scenario";
        for (const auto& c : t.columns) f << ',' << c;
        f << '\n';
        for (const auto& row : t.rows) {
            f << hash;
            for (const auto& c : row) f << ',' << c;
            f << '\n';
        }
        files.push_back(t.file);
    }
    json manifest;
    manifest["scenario"] = sc.raw;
    manifest["hash"] = hash;
    manifest["seed"] = sc.seed;
    manifest["preset"] = sc.preset;
    manifest["truncation"] = {{"J", sc.J}, {"M", sc.M}};
    manifest["params"] = {{"tau", sc.model.tau},       {"sigma0", sc.model.sigma0}, {"beta", sc.model.beta},
                          {"omega", sc.model.omega},   {"eta0", sc.model.eta0},     {"s", sc.norms.s},
                          {"sigma_check", sc.norms.sigma_check}};
    manifest["summary"] = out.summary;
    manifest["artifacts"] = files;
    std::ofstream f(fs::path(dir) / "manifest.json", std::ios::binary);
    f << manifest.dump(2) << '\n';
}

}  // namespace jmgt
