#pragma once

#include <optional>
#include <string>
#include <vector>

#include "noisyopt/analysis.hpp"
#include "noisyopt/config.hpp"

namespace noisyopt {

/* Everything produced by one experiment: traces, reference, bounds, fits. */
struct ExperimentResult {
    ExperimentSetup setup;
    ReferenceSolution reference;
    BoundConstants constants;
    TrialEnsemble ensemble;
    std::vector<std::vector<CurvePoint>> curves;   // per agent
    std::vector<double> gap_bound;                 // bound at each checkpoint
    std::vector<DisagreementReport> disagreement;  // per agent
    std::vector<std::optional<RateFit>> fits;      // per agent, tail window
    long fit_lo = 0, fit_hi = 0;
    int gap_bound_violations = 0;  // checkpoints with mean error above the bound
};

/* Worker count: --jobs flag beats NOISY_OPT_JOBS beats hardware concurrency. */
int default_jobs();

/*
 * Solves the reference problem, runs trials_M seeded trials (concurrently up
 * to `jobs`), and aggregates curves, bounds, and fits. Trial seeding depends
 * only on (config, trial index), so results are independent of scheduling.
 * Non-Euclidean mirror-descent maps must pass the randomized
 * separate-convexity gate first; failures throw ConfigMismatch.
 */
ExperimentResult run_experiment(ExperimentSetup setup, int jobs);

/*
 * Writes manifest.json (resolved config + derived constants), curve.csv,
 * trials/trial_XXX.csv, summary.json, and optionally plot.svg under out_dir.
 */
void write_artifacts(const ExperimentResult& result, const std::string& out_dir,
                     bool plot);

}  // namespace noisyopt
