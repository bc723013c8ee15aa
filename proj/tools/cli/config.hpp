#pragma once

// Run configuration shared by all subcommands. The on-disk format is JSON;
// a CSV written by any subcommand also works as a config, through its
// "# config:" header line.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pilot/model.hpp"

namespace pilot::cli {

/// Malformed or inconsistent configuration. Maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SweepConfig {
    double min = 0.05;
    double max = 50.0;
    std::size_t count = 40;
    bool log = true;
};

struct McConfig {
    std::size_t reps = 10000;
    /// 0 selects 1e-3 / snr^2.
    double dt = 0.0;
    std::uint64_t seed = 1;
    /// simulate: length of the recorded paths and ensemble.
    double horizon = 1.0;
    /// simulate: number of sample paths written out.
    std::size_t paths = 5;
    /// simulate: keep every n-th step in paths.csv and ensemble.csv.
    std::size_t record_every = 10;
};

struct CertifyConfig {
    std::size_t reps = 100000;
    std::size_t grid_n = 4001;
    double perturbation = 0.02;
};

struct RunConfig {
    std::string model = "base";  ///< "base" or "extended"
    std::optional<ModelFields> params;
    std::optional<double> p0;
    std::optional<SweepConfig> sweep;
    McConfig mc;
    CertifyConfig certify;
    std::vector<double> asymptotic_sigmas{0.025, 0.05, 0.1, 0.2, 200.0, 400.0, 1000.0, 2000.0};
    std::string output = ".";

    /// Validated parameters; throws ConfigError when absent.
    ModelParams model_params() const;
    bool extended() const { return model == "extended"; }
};

RunConfig parse_config(const nlohmann::json& j);
/// Everything except `output`, so a rerun into another directory matches.
nlohmann::json to_json(const RunConfig& cfg);

/// Reads a JSON file, or the "# config:" line of a CSV written by this tool.
RunConfig load_config(const std::string& path);

}  // namespace pilot::cli
