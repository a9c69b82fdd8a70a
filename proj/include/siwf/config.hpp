// config.hpp — experiment definitions: a strict JSON schema for models,
// initial states and run parameters, resolved into library objects.

#pragma once

#include "siwf/ensemble.hpp"
#include "siwf/integrator.hpp"
#include "siwf/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace siwf {

// Diagnostic naming the offending key and the violated constraint.
class ConfigError : public Error {
public:
    using Error::Error;
};

inline constexpr const char* kCodeVersion = "1.0.0";

struct SimConfig {
    nlohmann::json model;          // resolved model block, defaults filled in
    nlohmann::json initial_state;  // resolved initial-state block
    double dt = 1e-3;
    double t_final = 1.0;
    std::size_t n_trajectories = 1;
    std::uint64_t seed = 1;
    SchemeId scheme = SchemeId::euler_maruyama;
    Equation equation = Equation::siwf;
    long save_stride = 1;
    nlohmann::json observables = nlohmann::json::array();  // names or {name, matrix}
    std::string output_dir = "output";
    bool renormalize = true;
    bool write_densities = false;
    bool write_trajectories = true;
    Tolerances tol{};

    // Fully resolved config; parse_config(to_json().dump()) round-trips.
    nlohmann::json to_json() const;
};

// Parses a config document, or the manifest written by a previous run.
// Unknown keys are rejected.
SimConfig parse_config(const std::string& text);
SimConfig config_from_json(const nlohmann::json& doc);
SimConfig load_config(const std::string& path);

// Applies one `key=value` style override (used for CLI flags); the result is
// re-validated.
SimConfig with_override(const SimConfig& cfg, const std::string& key, const nlohmann::json& value);

// Builders; each throws ConfigError on inconsistent input.
ModelSpec build_model(const nlohmann::json& model_block, const Tolerances& tol = {});
InitialDecomposition build_initial_state(const nlohmann::json& state_block, const ModelSpec& model,
                                         const Tolerances& tol = {});
std::vector<Observable> build_observables(const nlohmann::json& list, const ModelSpec& model);

// Complex matrices and vectors as nested arrays of [re, im] pairs; a bare
// number is accepted as a real entry.
Operator parse_matrix(const nlohmann::json& j, const std::string& key);
StateVector parse_vector(const nlohmann::json& j, const std::string& key);
nlohmann::json matrix_to_json(const Operator& m);

// Run-ready objects for a config.
struct ResolvedRun {
    std::shared_ptr<const ModelSpec> model;
    InitialDecomposition dec;
    std::vector<Observable> observables;
    TrajectorySpec spec;
};
ResolvedRun resolve(const SimConfig& cfg);

}  // namespace siwf
