#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "noisyopt/geometry.hpp"
#include "noisyopt/methods.hpp"
#include "noisyopt/noise.hpp"
#include "noisyopt/problems.hpp"
#include "noisyopt/topology.hpp"

namespace noisyopt {

/*
 * Flat experiment configuration mirroring the JSON wire schema. String fields
 * hold wire tokens verbatim; validate_config checks ranges and cross-field
 * pairings and throws ConfigError / ConfigMismatch with the offending key in
 * the message.
 */
struct ExperimentConfig {
    // network
    int n_agents = 1;
    int window_b = 1;
    double theta = 0.0;  // 0 = unset; resolves to 1/n_agents
    std::string topology_kind = "static_ring";
    std::uint64_t topology_seed = 1;
    // link noise
    double noise_kappa2 = 1.0;
    double noise_nu = 0.0;
    std::string noise_dist = "zero";
    bool noise_zero_mean = true;
    std::uint64_t noise_seed = 2;
    // geometry
    std::string mirror_map;    // required for method dscmd_n
    std::string proximal_psi;  // required for method dscda_n
    std::string regularizer_local = "zero";
    std::string regularizer_global = "zero";
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::string set_kind = "box";
    std::vector<double> set_params{-1.0, 1.0};
    // problem
    std::string problem_variant = "problem1";
    std::string objective_kind = "abs_regression";
    int dim = 1;
    std::uint64_t data_seed = 3;
    double grad_noise_sigma = 0.0;
    bool grad_bounded = true;
    // algorithm
    std::string method = "dscmd_n";
    long horizon_t = 1000;
    double kappa1 = 0.5;
    int checkpoint_count = 0;  // 0 = default density
    std::string checkpoint_spacing = "log";
    std::optional<std::vector<double>> init_override;
    std::uint64_t master_seed = 7;
    // harness
    std::string output_dir = "out";
    int trials_m = 20;
    bool plot = false;
};

/* Parses and validates; unknown keys are rejected. */
ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/* Range and cross-field checks; messages name the key and admissible range. */
void validate_config(const ExperimentConfig& cfg);

/* Serializes the resolved configuration (defaults filled in) as pretty JSON. */
std::string config_to_json(const ExperimentConfig& cfg);

/* Fully constructed run machinery for one experiment. */
struct ExperimentSetup {
    ExperimentConfig resolved;
    TopologySchedule topology;
    NoiseDecay decay;
    MirrorMap map;
    CompositeProblem problem;
    Method method;
    StepSchedule steps;
    std::vector<long> checkpoints;

    /* Per-trial stochastic components; deterministic in (config, trial). */
    LinkNoiseSampler noise_for_trial(int trial) const;
    StochasticSubgradientOracle oracle_for_trial(int trial) const;
    RunConfig run_config() const;
};

ExperimentSetup build_setup(const ExperimentConfig& cfg);

}  // namespace noisyopt
