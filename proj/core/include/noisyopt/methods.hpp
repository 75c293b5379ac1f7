#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "noisyopt/geometry.hpp"
#include "noisyopt/noise.hpp"
#include "noisyopt/problems.hpp"
#include "noisyopt/topology.hpp"

namespace noisyopt {

/* Wire names: dscmd_n (mirror descent) / dscda_n (dual averaging). */
enum class Method { mirror_descent, dual_averaging };

/* Polynomially decaying step size alpha_t = (t + 1)^(-kappa1). */
struct StepSchedule {
    double kappa1;
    double at(long t) const { return std::pow(t + 1.0, -kappa1); }
};

/*
 * Log-spaced recording grid over {1, ..., horizon}, deduplicated, always
 * containing 1 and horizon. count <= 0 picks the default density
 * min(200, ceil(40 * log10(horizon))).
 */
std::vector<long> checkpoint_grid(long horizon, int count = 0);

struct RunConfig {
    Method method = Method::mirror_descent;
    long horizon = 1000;
    StepSchedule steps{0.5};
    NoiseDecay decay{1.0};
    /* All agents start here when set; default is the set's canonical center
       (mirror descent) or the mirror map's minimizer over the set (dual
       averaging). */
    std::optional<Vector> init_override;
    /* Defaults to checkpoint_grid(horizon); must be sorted ascending. */
    std::vector<long> checkpoints;
    /* Accumulate per-step pairwise disagreement sums (O(N^2) per step). */
    bool track_pairwise = true;
};

/*
 * Per-agent values recorded at iterate index t (the state after t update
 * steps). step_norm[i] measures the step that produced iterate t, i.e.
 * ||x_i^t - y_i^{t-1}|| for mirror descent and ||x_i^t - x_i^{t-1}|| for dual
 * averaging; disagreement[j] is the running sum over s = 1..t of
 * sum_i ||x_i^s - x_j^s|| with j as reference agent.
 */
struct CheckpointRecord {
    long t = 0;
    std::vector<double> avg_value;       // F of the running-average iterate
    std::vector<double> inst_value;      // F(x_i^t)
    /* Running minimum of F(x_i^s), s <= t: exact (every step) for agent 0,
       sampled at checkpoints for the others. */
    std::vector<double> min_inst_value;
    std::vector<double> step_norm;
    std::vector<double> disagreement;
    std::vector<double> dual_deviation;  // ||z_i^t - mean_j z_j^t|| (dual averaging)
    std::vector<Vector> iterate;         // raw x_i^t, one per agent
    double max_pairwise = 0.0;           // max_{i,j} ||x_i^t - x_j^t||
};

struct RunTrace {
    std::vector<CheckpointRecord> records;
    std::vector<double> init_norms;  // ||x_i^0||, used by the consensus bounds
};

/*
 * One full trajectory of the selected method over the noisy time-varying
 * network. Communication adds the decaying link perturbation
 * r_t * xi_ij^t to every off-diagonal exchange (an agent reads its own state
 * exactly); subgradients come from the keyed stochastic oracle. Mirror
 * descent queries the oracle at the mixed point y_i^t, dual averaging at the
 * primal iterate x_i^t.
 */
RunTrace run_trial(const CompositeProblem& problem, const MirrorMap& map,
                   const TopologySchedule& topology,
                   const LinkNoiseSampler& noise,
                   const StochasticSubgradientOracle& oracle,
                   const RunConfig& cfg);

}  // namespace noisyopt
