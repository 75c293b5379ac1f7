#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noisyopt/geometry.hpp"

namespace noisyopt {

enum class ObjectiveKind { abs_regression, hinge, quadratic, linear };

/*
 * One agent's convex cost. Regression kinds average over data rows:
 *   abs_regression: (1/m) sum_r |<a_r, x> - b_r|
 *   hinge:          (1/m) sum_r max(0, 1 - b_r <a_r, x>)   (b_r in {-1, +1})
 *   quadratic:      (1/2m) ||A x - b||^2
 *   linear:         <c, x>
 */
struct LocalObjective {
    ObjectiveKind kind;
    Matrix A;  // regression data (rows x dim)
    Vector b;  // targets / labels
    Vector c;  // linear cost

    double value(const Vector& x) const;
    Vector subgradient(const Vector& x) const;
    /* Uniform subgradient-norm bound over { ||x|| <= radius }. */
    double grad_bound(double radius) const;
    bool smooth() const { return kind == ObjectiveKind::quadratic || kind == ObjectiveKind::linear; }
};

/* Which slot the composite regularizer occupies. Wire names: problem1/problem2. */
enum class ProblemVariant { local_reg, global_reg };

/*
 * Sum-structured composite problem over a compact set.
 *   local_reg:  F(x) = sum_i [ f_i(x) + chi_i(x) ]
 *   global_reg: F(x) = (1/N) sum_i f_i(x) + eta(x)
 */
struct CompositeProblem {
    ProblemVariant variant;
    int n_agents;
    int dim;
    std::vector<LocalObjective> objectives;  // one per agent
    std::vector<Regularizer> local_regs;     // local_reg variant, one per agent
    Regularizer global_reg = Regularizer::zero();
    ConstraintSet set;

    double value(const Vector& x) const;  // F(x)
    double local_f(int agent, const Vector& x) const;
    Vector local_subgradient(int agent, const Vector& x) const;
    /* The regularizer seen by one agent's prox step. */
    const Regularizer& agent_regularizer(int agent) const;
    /* max_i sup over the set inflated by `inflation` of ||subgradient of f_i||. */
    double grad_bound(double inflation) const;
    /* Uniform subgradient bound of the composite part (chi or eta) over the set. */
    double reg_bound() const;
    void validate() const;
};

/*
 * Per-(agent, step) keyed stochastic subgradient: the true subgradient plus a
 * zero-mean perturbation. Unbounded mode adds sigma * standard normal
 * (E||g~||^2 <= G_clean^2 + sigma^2 dim); bounded mode draws the perturbation
 * uniformly from the sigma-ball so ||g~|| <= G_clean + sigma surely while
 * staying unbiased.
 */
struct StochasticSubgradientOracle {
    double sigma;
    bool bounded;
    std::uint64_t seed;

    Vector sample(const CompositeProblem& problem, int agent, const Vector& x,
                  long t) const;
    /* Second-moment bound G including the perturbation, over the inflated set. */
    double g_bound(const CompositeProblem& problem, double inflation) const;
};

struct ReferenceSolution {
    Vector x_star;
    double f_star = 0.0;
    double restart_spread = 0.0;  // max |f_best per restart - f_star|
    std::string method;
    bool cross_checked = false;  // second independent route agreed
};

struct ReferenceOptions {
    int restarts = 10;
    long budget = 1000000;  // total iteration budget across restarts
    std::uint64_t seed = 20240901;
    double agree_tol = 1e-5;
};

/*
 * High-accuracy minimizer of F over the set. Dispatches by structure:
 * linear objectives on the simplex are solved exactly at a vertex; smooth or
 * prox-friendly problems run proximal gradient to machine-level tolerance;
 * everything else runs a sharp Polyak-target subgradient method. Always
 * multi-started; throws ReferenceSolveUnverified when restarts disagree or a
 * random-probe certificate fails.
 */
ReferenceSolution solve_reference(const CompositeProblem& problem,
                                  const ReferenceOptions& opts = {});

}  // namespace noisyopt
