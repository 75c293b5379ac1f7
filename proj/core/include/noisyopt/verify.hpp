#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "noisyopt/experiment.hpp"

namespace noisyopt {

/* One verification verdict: what was measured against what gate. */
struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::string measured;
    std::string expected;
};

/*
 * Canonical acceptance experiments with frozen seeds. The rate checks, the
 * bound-domination check, and the invariant checks all run against these.
 */
ExperimentConfig md_benchmark_config();               // nonsmooth regression, box
ExperimentConfig da_benchmark_config(double kappa2);  // quadratic + mixed reg, ball
ExperimentConfig hp_md_config();                      // bounded-noise coverage runs
ExperimentConfig hp_da_config();
ExperimentConfig simplex_benchmark_config();          // linear objectives, entropic map

/*
 * Caches acceptance runs so checks that share an ensemble (rates, bound
 * domination, invariants, coverage) execute each experiment once.
 */
class VerifyContext {
  public:
    explicit VerifyContext(int jobs);
    int jobs() const { return jobs_; }
    const ExperimentResult& run_for(const std::string& tag,
                                    const ExperimentConfig& cfg);

  private:
    int jobs_;
    std::map<std::string, ExperimentResult> cache_;
};

/* Registered check names, in report order. */
std::vector<std::string> verification_names();
bool is_verification_name(const std::string& name);

/* Runs one named check; unknown names throw ConfigError. */
CheckOutcome run_verification(const std::string& name, VerifyContext& ctx);

/* Generic per-run checks for an arbitrary config (bound domination,
   consensus invariants, fit sanity); used by `verify <config.json>`. */
std::vector<CheckOutcome> verify_config_run(const ExperimentConfig& cfg,
                                            int jobs);

/*
 * Derivative-free minimizer over the set: refined grid descent walking a
 * 3^d neighborhood, spacing shrunk to 1e-5. Independent of the inner
 * solvers; the oracle behind the inner-solver equivalence check.
 */
Vector grid_minimize(const ConstraintSet& set,
                     const std::function<double(const Vector&)>& h);

}  // namespace noisyopt
