#include "noisyopt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace noisyopt {

namespace {

double xlogx(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

}  // namespace

MirrorMap MirrorMap::euclidean() {
    return MirrorMap(MirrorMapKind::euclidean_half_sq_norm, 2.0, 0.0);
}

MirrorMap MirrorMap::negative_entropy(double floor) {
    if (!(floor > 0.0) || floor >= 1e-3)
        throw ConfigError("neg_entropy floor must lie in (0, 1e-3)");
    return MirrorMap(MirrorMapKind::neg_entropy, 0.0, floor);
}

MirrorMap MirrorMap::p_norm(double p) {
    if (!(p > 1.0) || p > 2.0) throw ConfigError("p_norm_sq needs p in (1, 2]");
    return MirrorMap(MirrorMapKind::p_norm_sq, p, 0.0);
}

double MirrorMap::value(const Vector& x) const {
    switch (kind_) {
        case MirrorMapKind::euclidean_half_sq_norm:
            return 0.5 * x.squaredNorm();
        case MirrorMapKind::neg_entropy: {
            double s = 0.0;
            for (int k = 0; k < x.size(); ++k) {
                if (x[k] < -1e-9)
                    throw DomainViolation("neg_entropy value at negative coordinate " +
                                          format_double(x[k]));
                s += xlogx(x[k]);
            }
            return s;
        }
        case MirrorMapKind::p_norm_sq: {
            double s = 0.0;
            for (int k = 0; k < x.size(); ++k) s += std::pow(std::abs(x[k]), p_);
            return 0.5 * std::pow(s, 2.0 / p_);
        }
    }
    throw Error("unreachable map kind");
}

Vector MirrorMap::gradient(const Vector& x) const {
    switch (kind_) {
        case MirrorMapKind::euclidean_half_sq_norm:
            return x;
        case MirrorMapKind::neg_entropy: {
            Vector g(x.size());
            for (int k = 0; k < x.size(); ++k) {
                const double v = std::max(x[k], floor_);
                g[k] = 1.0 + std::log(v);
            }
            return g;
        }
        case MirrorMapKind::p_norm_sq: {
            double s = 0.0;
            for (int k = 0; k < x.size(); ++k) s += std::pow(std::abs(x[k]), p_);
            if (s == 0.0) return Vector::Zero(x.size());
            const double np = std::pow(s, 1.0 / p_);  // ||x||_p
            Vector g(x.size());
            for (int k = 0; k < x.size(); ++k) {
                const double m = std::pow(std::abs(x[k]), p_ - 1.0);
                g[k] = std::pow(np, 2.0 - p_) * m * (x[k] < 0.0 ? -1.0 : 1.0);
            }
            return g;
        }
    }
    throw Error("unreachable map kind");
}

double MirrorMap::bregman(const Vector& x, const Vector& y) const {
    const Vector yc = clamp_domain(y);
    return value(x) - value(yc) - gradient(yc).dot(x - yc);
}

double MirrorMap::strong_convexity() const {
    switch (kind_) {
        case MirrorMapKind::euclidean_half_sq_norm:
            return 1.0;
        case MirrorMapKind::neg_entropy:
            // 1-strongly convex wrt ell_1 on the simplex, hence also wrt ell_2.
            return 1.0;
        case MirrorMapKind::p_norm_sq:
            return p_ - 1.0;
    }
    throw Error("unreachable map kind");
}

double MirrorMap::grad_lipschitz() const {
    switch (kind_) {
        case MirrorMapKind::euclidean_half_sq_norm:
            return 1.0;
        case MirrorMapKind::neg_entropy:
            return 1.0 / floor_;
        case MirrorMapKind::p_norm_sq:
            return p_ == 2.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    throw Error("unreachable map kind");
}

Vector MirrorMap::clamp_domain(const Vector& y) const {
    if (kind_ != MirrorMapKind::neg_entropy) return y;
    return y.cwiseMax(floor_);
}

// ---------------------------------------------------------------------------

ConstraintSet ConstraintSet::box(Vector lo, Vector hi) {
    if (lo.size() != hi.size() || lo.size() == 0)
        throw ConfigError("box bounds must be nonempty and of equal length");
    for (int k = 0; k < lo.size(); ++k)
        if (!(lo[k] < hi[k]))
            throw ConfigError("box needs lo < hi in every coordinate");
    ConstraintSet s(SetKind::box, static_cast<int>(lo.size()));
    s.lo_ = std::move(lo);
    s.hi_ = std::move(hi);
    return s;
}

ConstraintSet ConstraintSet::ball(Vector center, double radius) {
    if (center.size() == 0) throw ConfigError("ball center must be nonempty");
    if (!(radius > 0.0)) throw ConfigError("ball radius must be > 0");
    ConstraintSet s(SetKind::euclidean_ball, static_cast<int>(center.size()));
    s.center_ = std::move(center);
    s.radius_ = radius;
    return s;
}

ConstraintSet ConstraintSet::simplex(int dim) {
    if (dim < 1) throw ConfigError("simplex dimension must be >= 1");
    ConstraintSet s(SetKind::simplex, dim);
    return s;
}

bool ConstraintSet::contains(const Vector& x, double tol) const {
    if (x.size() != dim_) return false;
    switch (kind_) {
        case SetKind::box:
            for (int k = 0; k < dim_; ++k)
                if (x[k] < lo_[k] - tol || x[k] > hi_[k] + tol) return false;
            return true;
        case SetKind::euclidean_ball:
            return (x - center_).norm() <= radius_ + tol;
        case SetKind::simplex: {
            double s = 0.0;
            for (int k = 0; k < dim_; ++k) {
                if (x[k] < -tol) return false;
                s += x[k];
            }
            return std::abs(s - 1.0) <= tol;
        }
    }
    return false;
}

Vector ConstraintSet::project(const Vector& x) const {
    switch (kind_) {
        case SetKind::box:
            return x.cwiseMax(lo_).cwiseMin(hi_);
        case SetKind::euclidean_ball: {
            const Vector d = x - center_;
            const double n = d.norm();
            return n <= radius_ ? x : Vector(center_ + d * (radius_ / n));
        }
        case SetKind::simplex:
            return project_simplex(x);
    }
    throw Error("unreachable set kind");
}

double ConstraintSet::diameter() const {
    switch (kind_) {
        case SetKind::box:
            return (hi_ - lo_).norm();
        case SetKind::euclidean_ball:
            return 2.0 * radius_;
        case SetKind::simplex:
            return std::sqrt(2.0);  // distance between two vertices
    }
    throw Error("unreachable set kind");
}

double ConstraintSet::max_norm() const {
    switch (kind_) {
        case SetKind::box: {
            double s = 0.0;
            for (int k = 0; k < dim_; ++k)
                s += std::pow(std::max(std::abs(lo_[k]), std::abs(hi_[k])), 2);
            return std::sqrt(s);
        }
        case SetKind::euclidean_ball:
            return center_.norm() + radius_;
        case SetKind::simplex:
            return 1.0;  // vertices
    }
    throw Error("unreachable set kind");
}

Vector ConstraintSet::center() const {
    switch (kind_) {
        case SetKind::box:
            return 0.5 * (lo_ + hi_);
        case SetKind::euclidean_ball:
            return center_;
        case SetKind::simplex:
            return Vector::Constant(dim_, 1.0 / dim_);
    }
    throw Error("unreachable set kind");
}

Vector ConstraintSet::sample(CounterRng& rng) const {
    switch (kind_) {
        case SetKind::box: {
            Vector x(dim_);
            for (int k = 0; k < dim_; ++k)
                x[k] = lo_[k] + (hi_[k] - lo_[k]) * rng.next_double();
            return x;
        }
        case SetKind::euclidean_ball:
            return center_ + rng.ball_vector(dim_, radius_);
        case SetKind::simplex: {
            // Exponential spacings give a uniform Dirichlet(1,...,1) draw.
            Vector e(dim_);
            double s = 0.0;
            for (int k = 0; k < dim_; ++k) {
                e[k] = -std::log(rng.next_double_open());
                s += e[k];
            }
            return e / s;
        }
    }
    throw Error("unreachable set kind");
}

double ConstraintSet::bregman_diameter_sq(const MirrorMap& map) const {
    switch (map.kind()) {
        case MirrorMapKind::euclidean_half_sq_norm:
            return 0.5 * diameter() * diameter();
        case MirrorMapKind::neg_entropy:
            if (kind_ != SetKind::simplex)
                throw ConfigMismatch("neg_entropy map pairs with the simplex set");
            // KL(x||y) <= ln(1/floor) once y is clamped away from the boundary.
            return std::log(1.0 / map.floor());
        case MirrorMapKind::p_norm_sq: {
            // D(x, y) <= phi(x) + phi(y) + ||grad phi(y)|| * ||x|| <= 2 R_p^2
            // with R_p the largest p-norm over the set (ell_p <= d^(1/p - 1/2) ell_2).
            const double rp =
                std::pow(static_cast<double>(dim_), 1.0 / map.p() - 0.5) * max_norm();
            return 2.0 * rp * rp;
        }
    }
    throw Error("unreachable map kind");
}

Vector project_simplex(const Vector& v) {
    const int d = static_cast<int>(v.size());
    std::vector<double> u(v.data(), v.data() + d);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, tau = 0.0;
    int rho = 0;
    for (int k = 0; k < d; ++k) {
        css += u[k];
        const double t = (css - 1.0) / (k + 1);
        if (u[k] - t > 0.0) {
            rho = k + 1;
            tau = t;
        }
    }
    (void)rho;
    Vector x(d);
    for (int k = 0; k < d; ++k) x[k] = std::max(0.0, v[k] - tau);
    return x;
}

// ---------------------------------------------------------------------------

Regularizer Regularizer::zero() { return Regularizer(RegKind::zero, 0, 0, 0, 0); }

Regularizer Regularizer::l1(double lambda) {
    if (lambda < 0) throw ConfigError("l1 weight must be >= 0");
    return Regularizer(RegKind::l1, lambda, 0, 0, 0);
}

Regularizer Regularizer::half_l2_sq(double lambda) {
    if (lambda < 0) throw ConfigError("half_l2_sq weight must be >= 0");
    return Regularizer(RegKind::half_l2_sq, 0, lambda, 0, 0);
}

Regularizer Regularizer::linf(double lambda) {
    if (lambda < 0) throw ConfigError("linf weight must be >= 0");
    return Regularizer(RegKind::linf, 0, 0, lambda, 0);
}

Regularizer Regularizer::entropy(double lambda, double floor) {
    if (lambda < 0) throw ConfigError("entropy weight must be >= 0");
    Regularizer r(RegKind::entropy, 0, 0, 0, lambda);
    r.floor_ = floor;
    return r;
}

Regularizer Regularizer::mixed(double l1_weight, double l2_weight) {
    if (l1_weight < 0 || l2_weight < 0)
        throw ConfigError("mixed_l1_l2 weights must be >= 0");
    return Regularizer(RegKind::mixed_l1_l2, l1_weight, l2_weight, 0, 0);
}

bool Regularizer::is_zero() const {
    return w1_ == 0.0 && w2_ == 0.0 && winf_ == 0.0 && went_ == 0.0;
}

double Regularizer::value(const Vector& x) const {
    double s = 0.0;
    if (w1_ > 0.0) s += w1_ * x.lpNorm<1>();
    if (w2_ > 0.0) s += 0.5 * w2_ * x.squaredNorm();
    if (winf_ > 0.0) s += winf_ * x.lpNorm<Eigen::Infinity>();
    if (went_ > 0.0)
        for (int k = 0; k < x.size(); ++k) {
            if (x[k] < -1e-9)
                throw DomainViolation("entropy regularizer at negative coordinate");
            s += went_ * xlogx(x[k]);
        }
    return s;
}

Vector Regularizer::subgradient(const Vector& x) const {
    Vector g = Vector::Zero(x.size());
    if (w1_ > 0.0)
        for (int k = 0; k < x.size(); ++k)
            g[k] += w1_ * (x[k] > 0.0 ? 1.0 : (x[k] < 0.0 ? -1.0 : 0.0));
    if (w2_ > 0.0) g += w2_ * x;
    if (winf_ > 0.0) {
        int arg = 0;
        for (int k = 1; k < x.size(); ++k)
            if (std::abs(x[k]) > std::abs(x[arg])) arg = k;
        if (x[arg] != 0.0) g[arg] += winf_ * (x[arg] > 0.0 ? 1.0 : -1.0);
    }
    if (went_ > 0.0)
        for (int k = 0; k < x.size(); ++k)
            g[k] += went_ * (1.0 + std::log(std::max(x[k], floor_)));
    return g;
}

double Regularizer::lipschitz_on(const ConstraintSet& set) const {
    const double d = static_cast<double>(set.dim());
    double s = 0.0;
    if (w1_ > 0.0) s += w1_ * std::sqrt(d);
    if (w2_ > 0.0) s += w2_ * set.max_norm();
    if (winf_ > 0.0) s += winf_;
    if (went_ > 0.0) s += went_ * std::sqrt(d) * (1.0 + std::log(1.0 / floor_));
    return s;
}

}  // namespace noisyopt
