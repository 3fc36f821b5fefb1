#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gauss.hpp"
#include "model.hpp"
#include "rlapps.hpp"
#include "schedule.hpp"

namespace ttsa {

/// Step-size specification: explicit exponents, or a named preset whose
/// exponents depend on the horizon it is resolved against.
struct ScheduleSpec {
    bool is_preset = false;
    std::string preset;
    double a_exp = 0.0, b_exp = 0.0;
    double c0_gamma = 1.0, c0_beta = 1.0;
    std::int64_t k0 = 1;
    std::optional<std::int64_t> horizon;  // pins preset resolution when set

    StepSchedule resolve(std::int64_t default_horizon) const;
};

struct SimulateSpec {
    std::int64_t horizon = 0;
    std::size_t replications = 1;
    std::vector<std::int64_t> checkpoints;  // resolved; defaults to powers of 2
    std::size_t trajectories = 0;           // how many replications get a CSV
};

struct RatesSpec {
    std::vector<CloudTarget> targets;
    std::vector<DistanceMetric> metrics;
    std::vector<std::int64_t> n_grid;
    std::size_t replications = 0;
    bool whiten = false;
    std::size_t directions = 64;
    std::size_t bootstrap = 200;
};

struct CovarianceSpec {
    std::vector<std::int64_t> n_grid;
};

struct MdpSpec {
    FiniteMdp mdp;
    FeatureMap features;
    TdAlgorithm algorithm = TdAlgorithm::Gtd;
    bool generative = false;
};

struct ExperimentConfig {
    std::uint64_t config_hash = 0;
    std::optional<TtsaProblem> problem;
    std::optional<NoiseOracle> oracle;
    std::optional<ScheduleSpec> schedule;
    std::optional<SimulateSpec> simulate;
    std::optional<RatesSpec> rates;
    std::optional<CovarianceSpec> covariance;
    std::optional<MdpSpec> mdp;
};

/// Parses the JSON config file. Every schema violation raises ConfigError
/// naming the offending field path ("schedule.a_exp: ...").
ExperimentConfig load_config(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace ttsa
