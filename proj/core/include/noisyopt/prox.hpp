#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noisyopt/geometry.hpp"

namespace noisyopt {

/* Which solver a (map, set, regularizer) combination routes through. */
enum class ProxPath {
    closed_quadratic,  // soft-threshold / clip / radial scaling, exact
    closed_entropic,   // multiplicative-weights softmax, exact
    composite,         // one exact composite-prox solve (1-D root finding)
    iterative          // proximal-gradient fallback with certificate
};

struct ProxRoute {
    ProxPath path;
    std::string name;
};

/*
 * x+ = argmin_{x in set} { <g, x> + (1/alpha) D_map(x, y) + reg(x) }.
 * y may lie outside the set (it is a noise-corrupted mix); neg_entropy clamps
 * it into the positive orthant first.
 */
Vector mirror_step(const MirrorMap& map, const ConstraintSet& set,
                   const Regularizer& reg, const Vector& g, const Vector& y,
                   double alpha);

/*
 * x+ = argmin_{x in set} { <z, x> + (1/alpha) map.value(x) + t_weight * reg(x) }.
 */
Vector dual_averaging_projection(const MirrorMap& map, const ConstraintSet& set,
                                 const Regularizer& reg, const Vector& z,
                                 double alpha, double t_weight);

ProxRoute mirror_step_route(const MirrorMap& map, const ConstraintSet& set,
                            const Regularizer& reg);
ProxRoute dual_averaging_route(const MirrorMap& map, const ConstraintSet& set,
                               const Regularizer& reg);

/*
 * Exact minimizer over the set of
 *   sum_k [ c_k x_k + (q/2) x_k^2 + l1w |x_k| + entw x_k ln x_k ] + winfw ||x||_inf
 * with q > 0. Couplings (simplex sum, ball radius, the max-norm term) are
 * resolved by monotone 1-D root finding. Throws ConfigError for combinations
 * outside the supported matrix (e.g. winfw on non-box sets).
 */
Vector composite_prox(const ConstraintSet& set, const Vector& c, double q,
                      double l1w, double entw, double winfw);

/*
 * Count violations of convexity of D_map(x, .) in its second argument over
 * random triples from the set. Zero violations gates a map into the
 * mirror-descent method; the check is skipped for the euclidean map.
 */
int separate_convexity_violations(const MirrorMap& map, const ConstraintSet& set,
                                  int n_triples, std::uint64_t seed,
                                  double tol = 1e-9);

/* Shipped (map, set, regularizer) combinations, used by the oracle cross-checks. */
struct ProxCombo {
    MirrorMapKind map;
    SetKind set;
    RegKind reg;
};
std::vector<ProxCombo> shipped_mirror_step_combos();
std::vector<ProxCombo> shipped_dual_averaging_combos();

}  // namespace noisyopt
