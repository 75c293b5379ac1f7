#pragma once

#include <cstdint>
#include <limits>

#include "noisyopt/common.hpp"
#include "noisyopt/rng.hpp"

namespace noisyopt {

enum class MirrorMapKind { euclidean_half_sq_norm, neg_entropy, p_norm_sq };

/*
 * Distance-generating function Phi with its Bregman divergence
 *   D(x, y) = Phi(x) - Phi(y) - <grad Phi(y), x - y>.
 * strong_convexity() is the modulus with respect to the Euclidean norm.
 * neg_entropy works on the clamped positive orthant: points are pulled to a
 * small coordinate floor before gradients are taken, and the reported gradient
 * Lipschitz constant is 1/floor on that clamped domain.
 */
class MirrorMap {
  public:
    static MirrorMap euclidean();
    static MirrorMap negative_entropy(double floor = 1e-12);
    static MirrorMap p_norm(double p);  // p in (1, 2]

    MirrorMapKind kind() const { return kind_; }
    double p() const { return p_; }
    double floor() const { return floor_; }

    double value(const Vector& x) const;
    Vector gradient(const Vector& x) const;
    double bregman(const Vector& x, const Vector& y) const;

    double strong_convexity() const;
    /* Gradient Lipschitz constant on the working domain; +inf when no uniform
     * constant exists (p_norm_sq with p < 2 near the axes). */
    double grad_lipschitz() const;

    /* Pull a point into the map's admissible domain (identity except neg_entropy). */
    Vector clamp_domain(const Vector& y) const;

  private:
    MirrorMap(MirrorMapKind kind, double p, double floor)
        : kind_(kind), p_(p), floor_(floor) {}

    MirrorMapKind kind_;
    double p_;
    double floor_;
};

enum class SetKind { box, euclidean_ball, simplex };

/* Compact convex feasible set with Euclidean projection. */
class ConstraintSet {
  public:
    static ConstraintSet box(Vector lo, Vector hi);
    static ConstraintSet ball(Vector center, double radius);
    static ConstraintSet simplex(int dim);

    SetKind kind() const { return kind_; }
    int dim() const { return dim_; }

    bool contains(const Vector& x, double tol = 1e-9) const;
    Vector project(const Vector& x) const;

    double diameter() const;  // sup ||x - y||
    double max_norm() const;  // sup ||x||
    Vector center() const;    // canonical feasible starting point
    Vector sample(CounterRng& rng) const;

    /* sup over the set of D_map(x, y), with neg_entropy taken on the clamped domain. */
    double bregman_diameter_sq(const MirrorMap& map) const;

    const Vector& lo() const { return lo_; }
    const Vector& hi() const { return hi_; }
    const Vector& ball_center() const { return center_; }
    double radius() const { return radius_; }

  private:
    ConstraintSet(SetKind kind, int dim) : kind_(kind), dim_(dim) {}

    SetKind kind_;
    int dim_;
    Vector lo_, hi_;     // box
    Vector center_;      // ball
    double radius_ = 0;  // ball
};

/* Euclidean projection onto the probability simplex (sort-based, exact). */
Vector project_simplex(const Vector& v);

enum class RegKind { zero, l1, half_l2_sq, linf, entropy, mixed_l1_l2 };

/*
 * Convex regularizer
 *   w1 * ||x||_1  +  (w2/2) * ||x||^2  +  winf * ||x||_inf  +  went * sum_k x_k ln x_k.
 * Each named kind activates one slot (mixed_l1_l2 activates w1 and w2).
 * The entropy slot requires nonnegative inputs and uses the same coordinate
 * floor as the neg_entropy mirror map for subgradients.
 */
class Regularizer {
  public:
    static Regularizer zero();
    static Regularizer l1(double lambda);
    static Regularizer half_l2_sq(double lambda);
    static Regularizer linf(double lambda);
    static Regularizer entropy(double lambda, double floor = 1e-12);
    static Regularizer mixed(double l1_weight, double l2_weight);

    RegKind kind() const { return kind_; }
    bool is_zero() const;
    double w1() const { return w1_; }
    double w2() const { return w2_; }
    double winf() const { return winf_; }
    double went() const { return went_; }
    double floor() const { return floor_; }

    double value(const Vector& x) const;
    Vector subgradient(const Vector& x) const;
    /* Uniform subgradient-norm bound over the set: G for this regularizer. */
    double lipschitz_on(const ConstraintSet& set) const;

  private:
    Regularizer(RegKind kind, double w1, double w2, double winf, double went)
        : kind_(kind), w1_(w1), w2_(w2), winf_(winf), went_(went) {}

    RegKind kind_;
    double w1_, w2_, winf_, went_;
    double floor_ = 1e-12;
};

}  // namespace noisyopt
