#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace swmf {

using Json = nlohmann::json;

/// Output of one experiment run. `json` follows the record layout
/// {experiment, params, seed, resolved_constants, statistics,
/// confidence_intervals}; `csv` maps a file stem to CSV text.
struct ExperimentResult {
    Json json;
    std::map<std::string, std::string> csv;
    bool gated_failure = false;
};

struct ParamSpec {
    std::string name;
    Json default_value;
    std::string help;
};

struct ExperimentSpec {
    std::string name;
    std::string help;
    std::vector<ParamSpec> params;
    std::function<ExperimentResult(const Json& params, std::uint64_t seed, unsigned threads)> run;
};

const std::vector<ExperimentSpec>& experiment_specs();

/// nullptr for unknown names.
const ExperimentSpec* find_experiment(const std::string& name);

/// Defaults, overlaid by `config` (a JSON object of parameters), overlaid by
/// `flags` (raw strings parsed by the type of each default). Unknown keys and
/// unparsable values throw ParameterError.
Json resolve_params(const ExperimentSpec& spec, const Json& config, const std::map<std::string, std::string>& flags);

/// Human-readable parameter table with defaults.
std::string describe_params(const ExperimentSpec& spec);

ExperimentResult run_experiment(const std::string& name, const Json& params, std::uint64_t seed, unsigned threads);

/// One row per grid value of the single axis in `flags` (a comma-separated
/// value). No axis, several axes or an empty grid throw ParameterError.
struct SweepResult {
    std::string axis;
    std::vector<std::string> values;
    std::string csv;
    Json json;
    bool gated_failure = false;
};

SweepResult run_sweep(const std::string& experiment, const Json& config, const std::map<std::string, std::string>& flags,
                      std::uint64_t seed, unsigned threads);

}  // namespace swmf
