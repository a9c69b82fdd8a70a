// siwf — command-line front end: simulate, verify, compare.

#include "siwf/app.hpp"
#include "siwf/output.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<double> t_final;
    std::optional<long long> n_trajectories;
    std::optional<std::string> output_dir;
    std::optional<std::string> equation;
    std::optional<std::string> scheme;
};

siwf::SimConfig apply(siwf::SimConfig cfg, const Overrides& o) {
    if (o.seed) cfg = siwf::with_override(cfg, "seed", *o.seed);
    if (o.dt) cfg = siwf::with_override(cfg, "dt", *o.dt);
    if (o.t_final) cfg = siwf::with_override(cfg, "t_final", *o.t_final);
    if (o.n_trajectories) cfg = siwf::with_override(cfg, "n_trajectories", *o.n_trajectories);
    if (o.output_dir) cfg = siwf::with_override(cfg, "output_dir", *o.output_dir);
    if (o.equation) cfg = siwf::with_override(cfg, "equation", *o.equation);
    if (o.scheme) cfg = siwf::with_override(cfg, "scheme", *o.scheme);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification of stochastic interacting wave functions"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: SIWF_THREADS or hardware concurrency)")
        ->check(CLI::NonNegativeNumber);

    auto* sim = app.add_subcommand("simulate", "Run trajectories and write CSV/JSON output");
    std::string config_path;
    Overrides ov;
    sim->add_option("--config", config_path, "Config (or manifest) JSON file")->required();
    sim->add_option("--seed", ov.seed, "Override seed");
    sim->add_option("--dt", ov.dt, "Override time step");
    sim->add_option("--t-final", ov.t_final, "Override final time");
    sim->add_option("--n-trajectories", ov.n_trajectories, "Override trajectory count");
    sim->add_option("--output-dir", ov.output_dir, "Override output directory");
    sim->add_option("--equation", ov.equation, "Override equation");
    sim->add_option("--scheme", ov.scheme, "Override scheme");
    sim->add_option("--threads", threads, "Worker threads")->check(CLI::NonNegativeNumber);

    auto* ver = app.add_subcommand("verify", "Run a verification suite (default suite if none given)");
    std::string suite_path, report_path;
    ver->add_option("--suite", suite_path, "Suite JSON file");
    ver->add_option("--report", report_path, "Write the JSON report here");
    ver->add_option("--threads", threads, "Worker threads")->check(CLI::NonNegativeNumber);

    auto* cmp = app.add_subcommand("compare", "Compare two configs differing in dt, scheme or equation");
    std::string a_path, b_path, cmp_out;
    cmp->add_option("--a", a_path, "First config")->required();
    cmp->add_option("--b", b_path, "Second config")->required();
    cmp->add_option("--output", cmp_out, "Write the JSON report here");
    cmp->add_option("--threads", threads, "Worker threads")->check(CLI::NonNegativeNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            const siwf::SimConfig cfg = apply(siwf::load_config(config_path), ov);
            const auto res = siwf::run_simulate(cfg, threads, std::cerr);
            return res.records_consistent ? 0 : 1;
        }
        if (*ver) {
            const auto suite = suite_path.empty() ? siwf::default_suite() : siwf::load_suite(suite_path);
            const auto res = siwf::run_verify(suite, threads, std::cerr);
            std::cout << siwf::report_table(res.reports, res.expected);
            if (!report_path.empty()) siwf::write_text(report_path, res.to_json().dump(2) + "\n");
            return res.exit_code;
        }
        if (*cmp) {
            const auto res = siwf::run_compare(siwf::load_config(a_path), siwf::load_config(b_path), threads);
            std::cout << res.table;
            if (!cmp_out.empty()) siwf::write_text(cmp_out, res.report.dump(2) + "\n");
            return 0;
        }
    } catch (const siwf::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
