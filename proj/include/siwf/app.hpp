// app.hpp — run orchestration behind the command-line subcommands.

#pragma once

#include "siwf/config.hpp"
#include "siwf/verify.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace siwf {

// ------------------------------------------------------------- simulate --

struct SimulateResult {
    std::vector<std::filesystem::path> files;  // written files, in write order
    double max_record_residual = 0.0;          // worst B - W quadrature residual
    bool records_consistent = true;
};

// Writes manifest.json, per-trajectory CSVs (and density dumps if requested),
// mean.csv for Monte Carlo runs, or a single gksl.csv for the deterministic
// equation. Output bytes depend only on the config.
SimulateResult run_simulate(const SimConfig& cfg, int threads, std::ostream& log);

// --------------------------------------------------------------- verify --

struct SuiteEntry {
    std::string name;
    std::string check;
    nlohmann::json model;
    nlohmann::json state_a;
    nlohmann::json state_b;  // decomposition checks only
    Equation equation = Equation::siwf;  // record_consistency only
    double perturb_generator = 0.0;
    std::size_t n_traj = 1000;
    std::vector<double> t_grid;
    double t = -1.0;  // KS readout time; default t_final / 2
    std::vector<std::string> readouts;
    RunSettings run;
    bool expect_pass = true;
};

std::vector<SuiteEntry> parse_suite(const std::string& text);
std::vector<SuiteEntry> load_suite(const std::string& path);

// All checks on the qubit test models, the Rabi model (n_fock = 3) and the
// box model (n_grid = 16), with negative controls expected to fail.
std::vector<SuiteEntry> default_suite();

CheckReport run_suite_entry(const SuiteEntry& e);

struct SuiteResult {
    std::vector<CheckReport> reports;
    std::vector<bool> expected;
    int exit_code = 0;  // nonzero iff some outcome differs from its expectation
    nlohmann::json to_json() const;
};

SuiteResult run_verify(const std::vector<SuiteEntry>& suite, int threads, std::ostream& log);

// -------------------------------------------------------------- compare --

struct CompareResult {
    nlohmann::json report;
    std::string table;
};

// The configs may differ only in dt (integer ratio), scheme and equation.
// Pathwise: trajectory 0 of both on one shared noise path (the coarser dt
// sums the finer increments). With different dt a third run at the finest dt
// divided by the ratio gives the convergence ratio. With n_trajectories > 1
// the observable means are compared as well.
CompareResult run_compare(const SimConfig& a, const SimConfig& b, int threads);

}  // namespace siwf
