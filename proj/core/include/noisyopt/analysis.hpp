#pragma once

#include <functional>
#include <vector>

#include "noisyopt/methods.hpp"
#include "noisyopt/problems.hpp"
#include "noisyopt/topology.hpp"

namespace noisyopt {

/*
 * Every constant feeding the optimality-gap, step-size, and consensus bounds.
 * c1..c6 aggregate the network, subgradient, and geometry constants for the
 * mirror-descent gap bound; the dual-averaging bounds read the raw fields.
 */
struct BoundConstants {
    int n_agents = 0;
    int window = 1;            // joint-connectivity window length
    double theta = 0.0;        // uniform positive-weight floor
    double big_theta = 1.0;    // mixing envelope amplitude
    double gamma = 0.0;        // mixing envelope geometric decay
    double g_f = 0.0;          // stochastic-subgradient norm bound (inflated set)
    double g_chi = 0.0;        // per-agent composite-part subgradient bound
    double g_eta = 0.0;        // shared composite-part subgradient bound
    double sigma_map = 1.0;    // strong-convexity modulus of the mirror map
    double lips_map = 1.0;     // gradient Lipschitz constant of the mirror map
    double nu = 0.0;           // link-noise second-moment bound
    double set_diam = 0.0;        // Euclidean diameter of the feasible set
    double bregman_diam_sq = 0.0; // sup Bregman divergence over the set
    double init_norm = 0.0;       // max_j ||x_j^0||
    double psi_star = 0.0;        // prox-function gap at the reference optimum
    bool surely_bounded = false;  // subgradients and link noise bounded surely
    bool noise_zero_mean = true;

    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0, c5 = 0.0, c6 = 0.0;
};

/*
 * Assembles the bound constants for one run configuration. Mirror descent
 * queries the oracle at mixed points that can leave the feasible set by at
 * most sqrt(nu), so its subgradient bound is taken over the inflated set;
 * dual averaging queries at feasible iterates.
 */
BoundConstants assemble_constants(const CompositeProblem& problem,
                                  const MirrorMap& map,
                                  const TopologySchedule& topology, double nu,
                                  bool noise_surely_bounded,
                                  bool noise_zero_mean,
                                  const StochasticSubgradientOracle& oracle,
                                  Method method, double init_norm,
                                  double psi_star);

/*
 * Exact finite-sum optimality-gap bounds for the running-average iterate,
 * evaluated at each requested horizon (ascending). These are the tightest
 * forms; the closed-form variants below replace the sums with power-law
 * envelopes.
 */
std::vector<double> md_gap_bound_curve(const BoundConstants& c,
                                       const StepSchedule& steps,
                                       const NoiseDecay& decay,
                                       const std::vector<long>& horizons);
std::vector<double> da_gap_bound_curve(const BoundConstants& c,
                                       const StepSchedule& steps,
                                       const NoiseDecay& decay,
                                       const std::vector<long>& horizons);

/*
 * High-probability (1 - delta) gap bounds: the finite-sum expectation bound
 * plus the martingale deviation terms. Require surely-bounded subgradients
 * and link noise (and, for dual averaging, zero-mean noise); throw
 * ConfigMismatch otherwise.
 */
double md_gap_bound_hp(const BoundConstants& c, const StepSchedule& steps,
                       const NoiseDecay& decay, long horizon, double delta);
double da_gap_bound_hp(const BoundConstants& c, const StepSchedule& steps,
                       const NoiseDecay& decay, long horizon, double delta);

/*
 * Closed-form power-law gap bounds under alpha_t = (t+1)^(-kappa1),
 * r_t = (t+1)^(-kappa2). Mirror descent needs 0 < kappa1 < kappa2 <= 1 and
 * excludes 2*kappa2 - kappa1 = 1 when kappa2 < 1; dual averaging needs
 * kappa1 in (0,1), kappa2 in (0,1] and excludes kappa1 + kappa2 = 1 and
 * kappa1 + 2*kappa2 = 1 when kappa2 < 1. ExcludedExponent on the excluded
 * equalities, ConfigError outside the admissible ranges.
 */
double md_closed_rate_bound(const BoundConstants& c, double kappa1,
                            double kappa2, long horizon);
double da_closed_rate_bound(const BoundConstants& c, double kappa1,
                            double kappa2, long horizon);

/*
 * Combined envelope constants. With kappa1 = 1/2, kappa2 = 1 the
 * mirror-descent bound collapses to 3 * constant / sqrt(T) for T >= 3; the
 * high-probability variant folds the deviation term into the constant.
 */
double md_sqrt_envelope_constant(const BoundConstants& c);
double md_sqrt_envelope_constant_hp(const BoundConstants& c, double delta);

/* General dual-averaging envelope: gap <= 7 * constant / T^exponent. */
struct GeneralEnvelope {
    double constant;
    double exponent;
};
GeneralEnvelope da_general_envelope(const BoundConstants& c, double kappa1,
                                    double kappa2);

/* kappa1 = 1/2, kappa2 in (1/2, 1]: gap <= 6 * constant / sqrt(T). */
double da_sqrt_envelope_constant(const BoundConstants& c, double kappa2);

/*
 * High-probability dual-averaging envelope at stepsize exponent 1/2. Three
 * noise-decay regimes: T^(-kappa2) for kappa2 < 1/2, sqrt(ln T / T) at
 * kappa2 = 1/2, T^(-1/2) above. Value includes the regime's leading factor.
 */
double da_hp_envelope(const BoundConstants& c, double kappa2, double delta,
                      long horizon);

/*
 * Rate-regime trajectory implied by the link-noise decay exponent under the
 * 1/sqrt(t+1) stepsize: proportional to T^(-kappa2) when kappa2 < 1/2 (the
 * slowly decaying noise limits the achievable rate), sqrt(ln T)/sqrt(T) at
 * kappa2 = 1/2, and 1/sqrt(T) when kappa2 > 1/2. The trajectory is anchored
 * so its final point equals the finite-sum high-probability bound at the
 * last horizon, making it a certified ceiling there while exposing the
 * regime's decay order across the whole grid. Unlike the collapsed-constant
 * envelope above, the anchored form stays well defined at kappa2 = 1/4,
 * where only the collapsed constant degenerates, not the decay order.
 * Boundedness prerequisites match the high-probability bounds.
 */
std::vector<double> noise_regime_envelope(const BoundConstants& c,
                                          const StepSchedule& steps,
                                          const NoiseDecay& decay, double delta,
                                          const std::vector<long>& horizons);

/* Bound on E||x_i^{t+1} - y_i^t|| for the mirror-descent inner step. */
double md_step_bound(const BoundConstants& c, const StepSchedule& steps, long t);

/*
 * Bound on sum_{s<=T} sum_i E||x_i^s - x_j^s|| with reference agent j,
 * evaluated at each requested horizon. ref_init_norm is ||x_j^0||.
 */
std::vector<double> md_disagreement_bound_curve(const BoundConstants& c,
                                                const StepSchedule& steps,
                                                const NoiseDecay& decay,
                                                double ref_init_norm,
                                                const std::vector<long>& horizons);

/* Bound on E||z_i^t - mean_j z_j^t||, evaluated at each requested t >= 1. */
std::vector<double> da_dual_deviation_bound_curve(const BoundConstants& c,
                                                  const NoiseDecay& decay,
                                                  const std::vector<long>& ts);

/* M traces sharing one configuration and checkpoint grid. */
struct TrialEnsemble {
    std::vector<RunTrace> traces;
    std::vector<long> grid;
    double f_star = 0.0;
    bool surely_bounded = false;
    bool noise_zero_mean = true;

    int trials() const { return static_cast<int>(traces.size()); }
    void validate() const;  // identical grids across traces, at least one trial
};

struct CurvePoint {
    long t;
    double mean;
    double std_error;  // sample standard error; 0 when trials == 1
};

/* Per-checkpoint mean and standard error of F(average iterate) - f_star. */
std::vector<CurvePoint> expected_error_curve(const TrialEnsemble& ensemble,
                                             int agent);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int points = 0;
};

/*
 * Least-squares fit of log(mean) against log(t) over checkpoints in
 * [t_lo, t_hi]. DegenerateFit when fewer than 4 points fall in the window or
 * any mean is non-positive.
 */
RateFit fit_rate(const std::vector<CurvePoint>& curve, long t_lo, long t_hi);

struct HighProbReport {
    int trials = 0;
    int within = 0;
    double fraction = 0.0;
    double target = 0.0;  // 1 - delta
    double bound_value = 0.0;
    bool pass = false;
};

/*
 * Fraction of trials whose final-horizon error stays below
 * bound_fn(delta, T); passes when the fraction reaches 1 - delta. Requires
 * the ensemble's boundedness prerequisites and at least 50 trials.
 */
HighProbReport high_prob_check(const TrialEnsemble& ensemble, int agent,
                               double delta,
                               const std::function<double(double, long)>& bound_fn);

struct DisagreementReport {
    std::vector<long> ts;
    std::vector<double> measured;  // trial means
    std::vector<double> bound;
    int violations = 0;            // checkpoints with measured > bound
};

/*
 * Trial-mean consensus series paired with its bound: running pairwise
 * disagreement sums for mirror descent, dual-state deviation from the mean
 * for dual averaging.
 */
DisagreementReport disagreement_report(const TrialEnsemble& ensemble, int agent,
                                       const BoundConstants& c,
                                       const StepSchedule& steps,
                                       const NoiseDecay& decay, Method method);

struct AlmostSureReport {
    std::vector<long> ts;
    std::vector<double> min_error;  // min_{s<=t} F(x^s) - f_star
    std::vector<double> avg_error;  // F(average iterate at t) - f_star
    bool min_non_increasing = false;
    bool min_below_average = false;  // min error <= average error at every t
    double final_min_error = 0.0;
    double final_avg_error = 0.0;
};

/* Single-trace convergence diagnostics for one agent. */
AlmostSureReport almost_sure_diagnostics(const RunTrace& trace, int agent,
                                         double f_star);

}  // namespace noisyopt
