#include "siwf/app.hpp"

#include "siwf/output.hpp"
#include "siwf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace siwf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string indexed_name(const char* stem, std::size_t i, const char* suffix) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%06zu%s", stem, i, suffix);
    return buf;
}

TrajectoryRecord run_with_noise(const TrajectorySpec& spec, const NoisePath& noise) {
    const DensityMatrix rho0 = DensityMatrix::unchecked(spec.dec.reconstruct());
    switch (spec.equation) {
        case Equation::siwf: return run_siwf_trajectory(spec.ctx, spec.dec, noise, spec.opts);
        case Equation::nonlinear: return run_nonlinear_trajectory(spec.ctx, spec.dec.vectors.front(), noise, spec.opts);
        case Equation::linear: return run_linear_route(spec.ctx, spec.dec, noise, spec.opts);
        case Equation::belavkin: return run_belavkin_trajectory(spec.ctx, rho0, noise, spec.opts);
        case Equation::gksl: return run_gksl(spec.ctx, rho0, noise.n_steps(), spec.opts);
    }
    throw Error("run_with_noise: unsupported equation");
}

}  // namespace

// ------------------------------------------------------------- simulate --

SimulateResult run_simulate(const SimConfig& cfg, int threads, std::ostream& log) {
    ResolvedRun run = resolve(cfg);
    TrajectorySpec& spec = run.spec;
    spec.opts.keep_ensembles = false;
    spec.opts.keep_densities = true;
    const fs::path dir(cfg.output_dir);
    const std::size_t m = run.model->n_channels();

    SimulateResult result;
    auto emit = [&](const fs::path& p, const std::string& text) {
        write_text(p, text);
        result.files.push_back(p);
    };
    emit(dir / "manifest.json", manifest_json(cfg).dump(2) + "\n");

    if (cfg.equation == Equation::gksl) {
        const TrajectoryRecord rec = run_trajectory(spec, 0);
        emit(dir / "gksl.csv", trajectory_csv(rec, run.observables, m));
        if (cfg.write_densities) emit(dir / "gksl_densities.json", densities_json(rec).dump() + "\n");
        log << "gksl: " << rec.times.size() << " saved times written to " << dir.string() << "\n";
        return result;
    }

    const std::size_t n = cfg.n_trajectories;
    const bool per_trajectory = cfg.write_trajectories || n == 1;
    std::vector<RecordConsistency> checks(n);
    std::vector<std::vector<fs::path>> written(n);
    const TrajectoryVisitor visit = [&](std::size_t i, const TrajectoryRecord& rec) {
        checks[i] = check_record_consistency(rec, *run.model);
        if (per_trajectory) {
            const fs::path p = dir / indexed_name("trajectory", i, ".csv");
            write_text(p, trajectory_csv(rec, run.observables, m));
            written[i].push_back(p);
        }
        if (cfg.write_densities) {
            const fs::path p = dir / indexed_name("trajectory", i, "_densities.json");
            write_text(p, densities_json(rec).dump() + "\n");
            written[i].push_back(p);
        }
    };
    const ObservableSeries series = monte_carlo_observables(spec, n, threads, visit);
    for (const auto& w : written) result.files.insert(result.files.end(), w.begin(), w.end());
    if (n > 1) emit(dir / "mean.csv", mean_csv(series));

    for (const auto& c : checks) {
        result.max_record_residual = std::max(result.max_record_residual, c.max_residual);
        result.records_consistent = result.records_consistent && c.passed;
    }
    log << to_string(cfg.equation) << ": " << n << " trajectories, " << series.times.size()
        << " saved times, record consistency " << (result.records_consistent ? "ok" : "VIOLATED")
        << " (max residual " << format_double(result.max_record_residual) << "); output in " << dir.string()
        << "\n";
    return result;
}

// --------------------------------------------------------------- verify --

namespace {

const std::set<std::string> kChecks = {"model",           "norm_conservation",       "record_consistency",
                                       "gksl_mean",       "siwf_vs_belavkin",        "martingale",
                                       "decomposition_invariance", "distribution_match",
                                       "linear_route_equivalence"};

[[noreturn]] void suite_fail(std::size_t i, const std::string& what) {
    throw ConfigError("suite entry " + std::to_string(i) + ": " + what);
}

SuiteEntry parse_entry(const json& j, std::size_t i) {
    if (!j.is_object()) suite_fail(i, "must be an object");
    static const std::set<std::string> allowed = {
        "name",   "check",   "model", "initial_state", "state_b",  "perturb_generator", "n_traj",
        "dt",     "t_final", "seed",  "scheme",        "renormalize", "t_grid",         "t",
        "readouts", "expect", "equation"};
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) suite_fail(i, "unknown key '" + k + "'");
    SuiteEntry e;
    if (!j.contains("check") || !j.at("check").is_string()) suite_fail(i, "'check' is required");
    e.check = j.at("check").get<std::string>();
    if (!kChecks.count(e.check)) suite_fail(i, "unknown check '" + e.check + "'");
    e.name = j.value("name", e.check);
    if (!j.contains("model")) suite_fail(i, "'model' is required");

    // Reuse the simulation schema for the shared keys.
    json doc = {{"model", j.at("model")}};
    for (const char* k : {"initial_state", "dt", "t_final", "seed", "scheme", "renormalize", "equation"})
        if (j.contains(k)) doc[k] = j.at(k);
    SimConfig cfg;
    try {
        cfg = config_from_json(doc);
    } catch (const Error& err) {
        suite_fail(i, err.what());
    }
    e.model = cfg.model;
    e.state_a = cfg.initial_state;
    e.run.dt = cfg.dt;
    e.run.t_final = cfg.t_final;
    e.run.seed = cfg.seed;
    e.run.scheme = cfg.scheme;
    e.run.renormalize = cfg.renormalize;
    e.equation = cfg.equation;
    if (j.contains("state_b")) {
        json doc_b = doc;
        doc_b["initial_state"] = j.at("state_b");
        try {
            e.state_b = config_from_json(doc_b).initial_state;
        } catch (const Error& err) {
            suite_fail(i, std::string("state_b: ") + err.what());
        }
    }
    if ((e.check == "decomposition_invariance" || e.check == "distribution_match") && e.state_b.is_null())
        suite_fail(i, "'state_b' is required for " + e.check);
    try {
        e.perturb_generator = j.value("perturb_generator", 0.0);
        const long long n = j.value("n_traj", 1000LL);
        if (n < 1) suite_fail(i, "'n_traj' must be >= 1");
        e.n_traj = static_cast<std::size_t>(n);
        e.t_grid = j.value("t_grid", std::vector<double>{e.run.t_final});
        e.t = j.value("t", 0.5 * e.run.t_final);
        e.readouts = j.value("readouts", std::vector<std::string>{"sigma_z"});
        const std::string expect = j.value("expect", std::string("pass"));
        if (expect != "pass" && expect != "fail") suite_fail(i, "'expect' must be pass or fail");
        e.expect_pass = expect == "pass";
    } catch (const json::exception& err) {
        suite_fail(i, err.what());
    }
    for (double t : e.t_grid)
        if (!(t > 0.0 && t <= e.run.t_final + 1e-12)) suite_fail(i, "'t_grid' times must lie in (0, t_final]");
    return e;
}

ModelSpec entry_model(const SuiteEntry& e) {
    ModelSpec model = build_model(e.model, e.run.tol);
    if (e.perturb_generator == 0.0) return model;
    // Negative control: a drift generator inconsistent with (H, L).
    const Operator g = model.drift_generator() + e.perturb_generator * identity(model.d());
    ModelSpec bad = ModelSpec::with_drift_generator(model.hamiltonian(), model.lindblads(), g);
    for (const auto& [name, a] : model.observables()) bad.add_observable(name, a);
    return bad;
}

}  // namespace

std::vector<SuiteEntry> parse_suite(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("suite is not valid JSON: ") + e.what());
    }
    if (doc.is_object()) {
        for (const auto& [k, v] : doc.items())
            if (k != "checks") throw ConfigError("suite: unknown key '" + k + "' (expected 'checks')");
        doc = doc.value("checks", json::array());
    }
    if (!doc.is_array()) throw ConfigError("suite must be an array of checks or {\"checks\": [...]}");
    std::vector<SuiteEntry> out;
    for (std::size_t i = 0; i < doc.size(); ++i) out.push_back(parse_entry(doc[i], i));
    return out;
}

std::vector<SuiteEntry> load_suite(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read suite file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_suite(ss.str());
}

std::vector<SuiteEntry> default_suite() {
    const json monitored_qubit = {{"preset", "qubit"},
                                  {"params", {{"omega_x", 1.0}, {"omega_z", 0.0}, {"kappa", 1.0}, {"gamma", 0.0}}}};
    const json damped_qubit = {{"preset", "qubit"},
                               {"params", {{"omega_x", 0.0}, {"omega_z", 0.0}, {"kappa", 0.0}, {"gamma", 1.0}}}};
    const json rabi = {{"preset", "rabi"},
                       {"params",
                        {{"omega1", 1.0}, {"omega2", 1.2}, {"g", 0.1}, {"alpha", 0.5}, {"psi", 0.0}, {"n_fock", 3}}}};
    const json box = {{"preset", "box"},
                      {"params",
                       {{"alpha_kin", 0.05},
                        {"gamma", 1.0},
                        {"x_min", -1.0},
                        {"x_max", 1.0},
                        {"n_grid", 16},
                        {"potential", {{"type", "harmonic"}, {"k", 1.0}}}}}};
    const json excited = {{"type", "basis"}, {"index", 0}};
    const json half_mixed = {{"type", "maximally_mixed"}};
    const double r = 1.0 / std::sqrt(2.0);
    const json rotated = {{"type", "ensemble"},
                          {"weights", {0.5, 0.5}},
                          {"vectors", {{r, r}, {r, -r}}}};
    const json biased = {{"type", "density"}, {"diagonal", {0.7, 0.3}}};
    const json rabi_mixed = {{"type", "density"}, {"diagonal", {0.3, 0.2, 0.2, 0.1, 0.1, 0.1}}};
    const json box_localized = {{"type", "basis"}, {"index", 7}};

    auto entry = [](const std::string& name, const std::string& check, const json& model, const json& state) {
        json j = {{"name", name}, {"check", check}, {"model", model}, {"initial_state", state}};
        return j;
    };
    json suite = json::array();
    suite.push_back(entry("model/qubit", "model", monitored_qubit, excited));
    suite.push_back(entry("model/rabi", "model", rabi, excited));
    suite.push_back(entry("model/box", "model", box, box_localized));
    {
        json j = entry("model/perturbed_generator", "model", monitored_qubit, excited);
        j["perturb_generator"] = 0.1;
        j["expect"] = "fail";
        suite.push_back(j);
    }
    suite.push_back(entry("norm/rabi", "norm_conservation", rabi, rabi_mixed));
    {
        json j = entry("norm/rabi_unnormalized", "norm_conservation", rabi, rabi_mixed);
        j["renormalize"] = false;
        suite.push_back(j);
    }
    suite.push_back(entry("norm/box", "norm_conservation", box, box_localized));
    suite.push_back(entry("records/rabi", "record_consistency", rabi, rabi_mixed));
    {
        json j = entry("records/rabi_linear", "record_consistency", rabi, rabi_mixed);
        j["equation"] = "linear";
        suite.push_back(j);
    }
    suite.push_back(entry("records/box", "record_consistency", box, box_localized));
    {
        json j = entry("gksl_mean/amplitude_damping", "gksl_mean", damped_qubit, excited);
        j["n_traj"] = 10000;
        j["t_grid"] = {0.25, 0.5, 1.0};
        suite.push_back(j);
    }
    {
        // At 10^4 paths the standard error resolves the O(dt) weak bias of the
        // plain Euler-Maruyama drift on this Hamiltonian; the exponential
        // scheme integrates the G flow exactly.
        json j = entry("gksl_mean/rabi", "gksl_mean", rabi, rabi_mixed);
        j["scheme"] = "exponential_em";
        j["n_traj"] = 10000;
        j["t_grid"] = {0.5, 1.0};
        suite.push_back(j);
    }
    {
        json j = entry("gksl_mean/perturbed_generator", "gksl_mean", damped_qubit, excited);
        j["n_traj"] = 1000;
        j["perturb_generator"] = 0.2;
        j["expect"] = "fail";
        suite.push_back(j);
    }
    {
        json j = entry("siwf_vs_belavkin/rabi", "siwf_vs_belavkin", rabi, rabi_mixed);
        j["n_traj"] = 50;
        suite.push_back(j);
    }
    {
        json j = entry("siwf_vs_belavkin/box", "siwf_vs_belavkin", box,
                       json{{"type", "ensemble"},
                            {"weights", {0.5, 0.5}},
                            {"vectors", json::array()}});
        // ground-like and first excited-like grid states
        std::vector<double> a(16, 0.0), b(16, 0.0);
        a[7] = 1.0;
        b[8] = 1.0;
        j["initial_state"]["vectors"] = {a, b};
        j["n_traj"] = 50;
        suite.push_back(j);
    }
    {
        json j = entry("martingale/qubit", "martingale", monitored_qubit, biased);
        j["n_traj"] = 10000;
        j["t_grid"] = {0.25, 0.5, 1.0};
        suite.push_back(j);
    }
    {
        json j = entry("martingale/rabi", "martingale", rabi, rabi_mixed);
        j["n_traj"] = 10000;
        j["t_grid"] = {0.25, 0.5, 1.0};
        suite.push_back(j);
    }
    {
        json j = entry("linear_route/qubit", "linear_route_equivalence", monitored_qubit, biased);
        j["n_traj"] = 10000;
        j["t_grid"] = {0.25, 0.5, 1.0};
        j["readouts"] = {"sigma_z", "sigma_x", "purity"};
        suite.push_back(j);
    }
    {
        json j = entry("linear_route/rabi", "linear_route_equivalence", rabi, rabi_mixed);
        j["n_traj"] = 10000;
        j["t_grid"] = {0.25, 0.5, 1.0};
        j["readouts"] = {"sigma_z", "number", "purity"};
        suite.push_back(j);
    }
    {
        json j = entry("invariance/half_identity", "decomposition_invariance", monitored_qubit, half_mixed);
        j["state_b"] = rotated;
        j["n_traj"] = 10000;
        suite.push_back(j);
    }
    {
        json j = entry("invariance/different_rho0", "distribution_match", monitored_qubit, biased);
        j["state_b"] = half_mixed;
        j["n_traj"] = 10000;
        j["expect"] = "fail";
        suite.push_back(j);
    }
    return parse_suite(json{{"checks", suite}}.dump());
}

CheckReport run_suite_entry(const SuiteEntry& e) {
    const ModelSpec model = entry_model(e);
    const auto dec_a = build_initial_state(e.state_a, model, e.run.tol);

    auto single = [&](Equation equation) {
        TrajectorySpec spec{StepContext(model, e.run.scheme, e.run.dt, e.run.renormalize, e.run.tol), equation,
                            dec_a, e.run.t_final, e.run.seed, RecordOptions{}};
        return run_trajectory(spec, 0);
    };

    if (e.check == "model") return check_model(model);
    if (e.check == "norm_conservation") return check_norm_conservation(single(Equation::siwf), e.run.renormalize);
    if (e.check == "record_consistency") return check_records(single(e.equation), model);
    if (e.check == "gksl_mean") return check_gksl_mean(model, dec_a, e.n_traj, e.t_grid, e.run);
    if (e.check == "siwf_vs_belavkin") return check_siwf_vs_belavkin(model, dec_a, e.n_traj, e.run);
    if (e.check == "martingale") return check_martingale(model, dec_a, e.n_traj, e.t_grid, e.run);
    if (e.check == "linear_route_equivalence") {
        std::vector<Observable> readouts;
        for (const auto& r : e.readouts) readouts.push_back(resolve_observable(model, r));
        return check_linear_route_equivalence(model, dec_a, e.n_traj, e.t_grid, readouts, e.run);
    }
    const auto dec_b = build_initial_state(e.state_b, model, e.run.tol);
    const Observable readout = resolve_observable(model, e.readouts.front());
    if (e.check == "decomposition_invariance") {
        const DensityMatrix rho0 = DensityMatrix::checked(dec_a.reconstruct(), e.run.tol);
        return check_decomposition_invariance(model, rho0, dec_a, dec_b, e.n_traj, e.t, readout, e.run);
    }
    if (e.check == "distribution_match")
        return check_distribution_match(model, dec_a, dec_b, e.n_traj, e.t, readout, e.run);
    throw Error("unknown check '" + e.check + "'");
}

json SuiteResult::to_json() const {
    json arr = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        json r = report_json(reports[i]);
        r["expected"] = expected[i] ? "pass" : "fail";
        r["as_expected"] = reports[i].passed == expected[i];
        arr.push_back(r);
    }
    return arr;
}

SuiteResult run_verify(const std::vector<SuiteEntry>& suite, int threads, std::ostream& log) {
    SuiteResult out;
    if (suite.empty()) {
        log << "warning: empty suite, nothing to verify\n";
        return out;
    }
    for (const auto& entry : suite) {
        SuiteEntry e = entry;
        if (threads > 0) e.run.threads = threads;
        CheckReport r;
        try {
            r = run_suite_entry(e);
        } catch (const std::exception& ex) {
            r = CheckReport::make(e.check, CheckKind::exact, std::numeric_limits<double>::infinity(), 0.0,
                                  std::string("error: ") + ex.what());
        }
        r.name = e.name;
        log << (r.passed == e.expect_pass ? "[ok]       " : "[MISMATCH] ") << r.name << ": statistic "
            << format_double(r.statistic) << " vs threshold " << format_double(r.threshold) << " -> "
            << (r.passed ? "pass" : "fail") << " (expected " << (e.expect_pass ? "pass" : "fail") << ")\n";
        out.reports.push_back(std::move(r));
        out.expected.push_back(e.expect_pass);
    }
    for (std::size_t i = 0; i < out.reports.size(); ++i)
        if (out.reports[i].passed != out.expected[i]) out.exit_code = 1;
    return out;
}

// -------------------------------------------------------------- compare --

namespace {

void ensure_comparable(const SimConfig& a, const SimConfig& b) {
    json ja = a.to_json(), jb = b.to_json();
    for (const char* k : {"dt", "scheme", "equation", "output_dir"}) {
        ja.erase(k);
        jb.erase(k);
    }
    for (const auto& [k, v] : ja.items())
        if (jb.at(k) != v)
            throw ConfigError("incomparable configs: key '" + k + "' differs (only dt, scheme and equation may differ)");
}

double density_gap(const TrajectoryRecord& a, std::size_t ia, const TrajectoryRecord& b, std::size_t ib) {
    return max_abs(a.densities[ia].matrix() - b.densities[ib].matrix());
}

}  // namespace

CompareResult run_compare(const SimConfig& a, const SimConfig& b, int threads) {
    ensure_comparable(a, b);
    const double dt_c = std::max(a.dt, b.dt);
    const double dt_f = std::min(a.dt, b.dt);
    const double ratio = dt_c / dt_f;
    const long r = std::lround(ratio);
    if (std::abs(ratio - static_cast<double>(r)) > 1e-9 * ratio)
        throw ConfigError("incomparable configs: dt ratio " + format_double(ratio) + " is not an integer");
    const bool a_coarse = a.dt >= b.dt;

    ResolvedRun ra = resolve(a), rb = resolve(b);
    std::vector<Observable> observables = ra.observables;
    if (observables.empty()) observables.push_back(resolve_observable(*ra.model, "purity"));
    for (auto* spec : {&ra.spec, &rb.spec}) {
        spec->opts.save_stride = 1;
        spec->opts.keep_ensembles = false;
        spec->opts.keep_densities = true;
        spec->opts.observables = observables;
    }

    const int m = static_cast<int>(ra.model->n_channels());
    const long n_coarse = step_count(a.t_final, dt_c);
    const long extra = r > 1 ? r : 1;
    // Finest path drives everything; coarser grids sum its increments.
    const NoisePath finest = generate_noise(a.seed, 0, m, dt_f / static_cast<double>(extra), n_coarse * r * extra);
    const NoisePath fine = extra > 1 ? finest.coarsen(static_cast<int>(extra)) : finest;
    const NoisePath coarse = r > 1 ? fine.coarsen(static_cast<int>(r)) : fine;

    const TrajectoryRecord rec_a = run_with_noise(ra.spec, a_coarse ? coarse : fine);
    const TrajectoryRecord rec_b = run_with_noise(rb.spec, a_coarse ? fine : coarse);
    const TrajectoryRecord& rc = a_coarse ? rec_a : rec_b;
    const TrajectoryRecord& rf = a_coarse ? rec_b : rec_a;

    json report;
    report["a"] = {{"dt", a.dt}, {"scheme", to_string(a.scheme)}, {"equation", to_string(a.equation)}};
    report["b"] = {{"dt", b.dt}, {"scheme", to_string(b.scheme)}, {"equation", to_string(b.equation)}};
    report["seed"] = a.seed;

    std::ostringstream table;
    table << "pathwise (trajectory 0, shared noise)\n";
    table << "time,max_density_diff";
    for (const auto& o : observables) table << ",diff_" << o.name;
    table << '\n';
    json rows = json::array();
    double max_gap = 0.0;
    const long stride = a_coarse ? a.save_stride : b.save_stride;
    for (long k = 0; k <= n_coarse; ++k) {
        if (k % stride != 0 && k != n_coarse) continue;
        const auto ic = static_cast<std::size_t>(k);
        const auto ifn = static_cast<std::size_t>(k * r);
        const double gap = density_gap(rc, ic, rf, ifn);
        max_gap = std::max(max_gap, gap);
        json row = {{"time", rc.times[ic]}, {"max_density_diff", gap}};
        table << format_double(rc.times[ic]) << ',' << format_double(gap);
        for (const auto& o : observables) {
            const double d = std::abs(rec_a.observables.at(o.name)[a_coarse ? ic : ifn] -
                                      rec_b.observables.at(o.name)[a_coarse ? ifn : ic]);
            row["diff_" + o.name] = d;
            table << ',' << format_double(d);
        }
        table << '\n';
        rows.push_back(row);
    }
    report["pathwise"] = rows;
    report["max_density_diff"] = max_gap;
    const double final_gap = density_gap(rc, rc.times.size() - 1, rf, rf.times.size() - 1);
    report["final_density_diff"] = final_gap;
    table << "max over time: " << format_double(max_gap) << ", at T: " << format_double(final_gap) << '\n';

    if (r > 1 && a.equation == b.equation && a.scheme == b.scheme) {
        // Same equation at dt_f / r on the finest path.
        TrajectorySpec spec_x = (a_coarse ? rb : ra).spec;
        spec_x.ctx = StepContext(a_coarse ? rb.model : ra.model, spec_x.ctx.scheme(), dt_f / static_cast<double>(r),
                                 spec_x.ctx.renormalize(), a.tol);
        const TrajectoryRecord rx = run_with_noise(spec_x, finest);
        const double gap_fine = density_gap(rf, rf.times.size() - 1, rx, rx.times.size() - 1);
        double max_fine = 0.0;
        for (long k = 0; k <= n_coarse * r; ++k)
            max_fine = std::max(max_fine, density_gap(rf, static_cast<std::size_t>(k), rx,
                                                      static_cast<std::size_t>(k * r)));
        const double conv = gap_fine == 0.0 ? std::numeric_limits<double>::infinity() : final_gap / gap_fine;
        report["convergence"] = {{"dt_extra", dt_f / static_cast<double>(r)},
                                 {"final_diff_coarse_vs_fine", final_gap},
                                 {"final_diff_fine_vs_extra", gap_fine},
                                 {"ratio_at_T", conv},
                                 {"ratio_max_over_t", max_fine == 0.0 ? std::numeric_limits<double>::infinity()
                                                                      : max_gap / max_fine}};
        table << "convergence ratio at T: " << format_double(conv) << " (diff " << format_double(final_gap)
              << " -> " << format_double(gap_fine) << ")\n";
    }

    const std::size_t n = a.n_trajectories;
    if (n > 1) {
        ra.spec.opts.save_stride = a.save_stride;
        rb.spec.opts.save_stride = b.save_stride;
        const auto sa = monte_carlo_observables(ra.spec, n, threads);
        const auto sb = monte_carlo_observables(rb.spec, n, threads);
        table << "statistical (" << n << " trajectories per side)\n";
        table << "time,observable,mean_a,mean_b,diff,combined_se\n";
        json stat = json::array();
        for (std::size_t o = 0; o < observables.size(); ++o)
            for (std::size_t ia = 0; ia < sa.times.size(); ++ia) {
                const double t = sa.times[ia];
                std::size_t ib = 0;
                for (std::size_t k = 1; k < sb.times.size(); ++k)
                    if (std::abs(sb.times[k] - t) < std::abs(sb.times[ib] - t)) ib = k;
                if (std::abs(sb.times[ib] - t) > 1e-9 * std::max(1.0, t)) continue;
                const double d = sa.mean[o][ia] - sb.mean[o][ib];
                const double se = std::hypot(sa.se[o][ia], sb.se[o][ib]);
                stat.push_back({{"time", t}, {"observable", sa.names[o]}, {"mean_a", sa.mean[o][ia]},
                                {"mean_b", sb.mean[o][ib]}, {"diff", d}, {"combined_se", se}});
                table << format_double(t) << ',' << sa.names[o] << ',' << format_double(sa.mean[o][ia]) << ','
                      << format_double(sb.mean[o][ib]) << ',' << format_double(d) << ',' << format_double(se)
                      << '\n';
            }
        report["statistical"] = stat;
    }
    return {report, table.str()};
}

}  // namespace siwf
