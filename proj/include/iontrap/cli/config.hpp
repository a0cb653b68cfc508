// config.hpp: run configuration for the command-line front end

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "iontrap/evolution.hpp"
#include "iontrap/sideband.hpp"
#include "iontrap/trajectories.hpp"

namespace iontrap::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

enum class NoiseKind { Intensity, Phase };

// Flat key set; every key may appear in a config file. Time, rates and the
// step are in scaled units (tau = omega0 t) unless `physical` is set, in
// which case omega0 is an angular frequency in 1/s, tmax/t0/dt are seconds,
// gamma is in seconds and lambda in 1/s.
struct RunConfig {
    Sideband sideband = Sideband::Blue;
    int n = 0;
    int n_from = 0;
    int n_to = 5;
    double eta = 0.2;
    double omega0 = 1.0;
    bool physical = false;
    NoiseKind noise = NoiseKind::Intensity;
    double gamma = 0.041;
    double lambda = 0.0;
    double t0 = 0.0;
    double tmax = 100.0;
    int points = 1001;
    double dt = 0.01;
    int ntraj = 10000;
    std::uint64_t seed = 1;
    int nmax = 8;
    std::string out;
    std::string format = "csv";
    std::string method = "ode"; // ode | exact
    std::string scheme = "exact-unitary";
    int workers = 1;
    double step_norm = 0.05;
    std::optional<double> level_shift;
    long long samples = 100000;
};

// Parses a flat JSON object. A sidecar written by a previous run (an object
// with "schema_version" and "config") is accepted as well. Unknown keys and
// ill-typed values raise ConfigError naming the key and its line.
RunConfig parse_config(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::string& path);

// Applies `overrides` (same key set) on top of `base`.
RunConfig merge_config(RunConfig base, const nlohmann::ordered_json& overrides, const std::string& source);

nlohmann::ordered_json to_json(const RunConfig& cfg);

// Throws ConfigError on any violated precondition.
void validate(const RunConfig& cfg);

// The problem in scaled units (omega0 = 1 inside the library).
struct ScaledProblem {
    ModelParams params;
    double gamma = 0.0;
    double lambda = 0.0;
    TimeGrid grid{0.0, 1.0, 2};
    double dt = 0.01;
    double time_unit = 1.0; // seconds per unit of tau in physical mode, 1 otherwise
};

ScaledProblem scaled_problem(const RunConfig& cfg);
TrajectoryConfig trajectory_config(const RunConfig& cfg, const ScaledProblem& p);

} // namespace iontrap::cli
