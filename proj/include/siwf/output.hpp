// output.hpp — byte-stable persistence: CSV time series with 17 significant
// digits, JSON density dumps, run manifests and check reports.

#pragma once

#include "siwf/config.hpp"
#include "siwf/ensemble.hpp"
#include "siwf/verify.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace siwf {

// "%.17g" (round-trip safe).
std::string format_double(double x);

// Columns: time, W_1..W_M, B_1..B_M, [weight], observables.
std::string trajectory_csv(const TrajectoryRecord& rec, const std::vector<Observable>& observables,
                           std::size_t n_channels);

// Columns: time, <obs>_mean, <obs>_se for each observable.
std::string mean_csv(const ObservableSeries& series);

// {"times": [...], "densities": [[[re, im], ...], ...]}
nlohmann::json densities_json(const TrajectoryRecord& rec);

nlohmann::json manifest_json(const SimConfig& cfg);

nlohmann::json report_json(const CheckReport& r);

// Human-readable table of check outcomes.
std::string report_table(const std::vector<CheckReport>& reports, const std::vector<bool>& expected);

// Writes text; throws siwf::Error naming the path on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace siwf
