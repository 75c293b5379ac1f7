#include "noisyopt/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace noisyopt {

namespace {

double soft(double v, double tau) {
    if (v > tau) return v - tau;
    if (v < -tau) return v + tau;
    return 0.0;
}

/* minimize c x + (q/2) x^2 + l1 |x| + ent x ln x over [lo, hi], q > 0. */
double solve_1d(double c, double q, double l1, double ent, double lo, double hi) {
    if (ent <= 0.0) {
        const double x = soft(-c, l1) / q;
        return std::min(std::max(x, lo), hi);
    }
    // Entropy present: domain is x >= 0.
    const double lo_e = std::max(lo, 0.0);
    if (hi <= lo_e) return lo_e;
    // phi'(x) = (c + l1) + q x + ent (1 + ln x) is strictly increasing with
    // phi' -> -inf as x -> 0+, so the root is unique and clamping is exact.
    const double cl = c + l1;
    auto dphi = [&](double x) { return cl + q * x + ent * (1.0 + std::log(x)); };
    if (lo_e > 0.0 && dphi(lo_e) >= 0.0) return lo_e;
    double b = std::isfinite(hi) ? hi : std::max(1.0, (std::abs(cl) + ent) / q);
    if (std::isfinite(hi)) {
        if (dphi(hi) <= 0.0) return hi;
    } else {
        while (dphi(b) < 0.0) b *= 2.0;
    }
    double a = lo_e > 0.0 ? lo_e : std::min(1e-300, b * 0.5);
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        (dphi(m) > 0.0 ? b : a) = m;
    }
    return 0.5 * (a + b);
}

/* Separable minimizer over a box (no max-norm coupling). */
Vector box_separable(const ConstraintSet& set, const Vector& c, double q,
                     double l1w, double entw) {
    Vector x(set.dim());
    for (int k = 0; k < set.dim(); ++k) {
        if (entw > 0.0 && set.hi()[k] < 0.0)
            throw DomainViolation(
                "entropy term needs nonnegative coordinates; box lies below zero");
        x[k] = solve_1d(c[k], q, l1w, entw, set.lo()[k], set.hi()[k]);
    }
    return x;
}

Vector simplex_inner(const Vector& c, double q, double entw, double mu) {
    Vector x(c.size());
    for (int k = 0; k < c.size(); ++k)
        x[k] = solve_1d(c[k] + mu, q, 0.0, entw, 0.0,
                        std::numeric_limits<double>::infinity());
    return x;
}

Vector composite_prox_simplex(Vector c, double q, double entw, double l1w) {
    // On the simplex x >= 0, so the l1 part is linear: fold it into c.
    c.array() += l1w;
    // The coordinate sum decreases monotonically in the equality multiplier.
    double lo = 0.0, hi = 0.0;
    const double step = 1.0 + c.cwiseAbs().maxCoeff() + q + entw;
    while (simplex_inner(c, q, entw, lo).sum() < 1.0) lo -= step;
    while (simplex_inner(c, q, entw, hi).sum() > 1.0) hi += step;
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (lo + hi);
        (simplex_inner(c, q, entw, m).sum() > 1.0 ? lo : hi) = m;
    }
    Vector x = simplex_inner(c, q, entw, 0.5 * (lo + hi));
    const double s = x.sum();
    if (s > 0.0) x /= s;  // absorb last-bit slack in the equality constraint
    return x;
}

Vector composite_prox_ball(const ConstraintSet& set, const Vector& c, double q,
                           double l1w) {
    const Vector& c0 = set.ball_center();
    const double r = set.radius();
    if (c0.isZero(0.0)) {
        Vector v(c.size());
        for (int k = 0; k < c.size(); ++k) v[k] = soft(-c[k], l1w);
        const double denom = std::max(q, v.norm() / r);
        return v / denom;
    }
    // Off-center ball: bisect the radius multiplier mu >= 0.
    auto inner = [&](double mu) {
        Vector x(c.size());
        for (int k = 0; k < c.size(); ++k)
            x[k] = soft(-(c[k] - mu * c0[k]), l1w) / (q + mu);
        return x;
    };
    if ((inner(0.0) - c0).norm() <= r) return inner(0.0);
    double lo = 0.0, hi = 1.0;
    while ((inner(hi) - c0).norm() > r) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (lo + hi);
        ((inner(m) - c0).norm() > r ? lo : hi) = m;
    }
    return inner(hi);
}

/* Box with a max-norm term: golden-section over m = ||x||_inf. */
Vector composite_prox_box_maxnorm(const ConstraintSet& set, const Vector& c,
                                  double q, double l1w, double entw,
                                  double winfw) {
    const int d = set.dim();
    double m_min = 0.0, m_max = 0.0;
    for (int k = 0; k < d; ++k) {
        if (set.lo()[k] > 0.0) m_min = std::max(m_min, set.lo()[k]);
        if (set.hi()[k] < 0.0) m_min = std::max(m_min, -set.hi()[k]);
        m_max = std::max(m_max, std::max(std::abs(set.lo()[k]), std::abs(set.hi()[k])));
    }
    auto inner = [&](double m, Vector* out) {
        double val = winfw * m;
        for (int k = 0; k < d; ++k) {
            const double lo = std::max(set.lo()[k], -m);
            const double hi = std::max(std::min(set.hi()[k], m), lo);
            const double x = solve_1d(c[k], q, l1w, entw, lo, hi);
            val += c[k] * x + 0.5 * q * x * x + l1w * std::abs(x) +
                   (entw > 0.0 && x > 0.0 ? entw * x * std::log(x) : 0.0);
            if (out) (*out)[k] = x;
        }
        return val;
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = m_min, b = m_max;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = inner(x1, nullptr), f2 = inner(x2, nullptr);
    for (int it = 0; it < 300 && b - a > 1e-13 * std::max(1.0, m_max); ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = inner(x1, nullptr);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = inner(x2, nullptr);
        }
    }
    Vector x(d);
    inner(0.5 * (a + b), &x);
    return x;
}

bool quadratic_family(const Regularizer& reg) {
    return reg.winf() == 0.0 && reg.went() == 0.0;
}

/* Estimate the gradient Lipschitz constant of a map over a set (safety x4). */
double estimate_map_lipschitz(const MirrorMap& map, const ConstraintSet& set) {
    if (map.kind() != MirrorMapKind::p_norm_sq || map.p() == 2.0)
        return map.grad_lipschitz();
    CounterRng rng = CounterRng::keyed(0x11c0ffeeULL);
    double worst = 1.0;
    for (int s = 0; s < 200; ++s) {
        const Vector a = set.sample(rng);
        const Vector b = a + (set.sample(rng) - a) * 1e-3;  // nearby pair
        const double dn = (a - b).norm();
        if (dn < 1e-15) continue;
        worst = std::max(worst, (map.gradient(a) - map.gradient(b)).norm() / dn);
    }
    return 4.0 * worst;
}

void check_p_norm_box(const MirrorMap& map, const ConstraintSet& set) {
    if (map.kind() != MirrorMapKind::p_norm_sq || map.p() == 2.0) return;
    if (set.kind() != SetKind::box)
        throw ConfigError(
            "p_norm_sq maps support axis-separated boxes only (curvature is "
            "unbounded near the coordinate axes)");
    for (int k = 0; k < set.dim(); ++k)
        if (!(set.lo()[k] > 0.0 || set.hi()[k] < 0.0))
            throw ConfigError(
                "p_norm_sq maps need every box coordinate interval strictly on "
                "one side of zero");
}

/*
 * Proximal-gradient fallback for curved maps. Minimizes
 *   <lin, x> + scale * D_map(x, anchor) + w1||x||_1 + (w2/2)||x||^2
 *            + went * sum x ln x + winf ||x||_inf   over the set,
 * with composite-prox steps of length 1/L and a composite gradient-mapping
 * stopping certificate.
 */
Vector prox_gradient_fallback(const MirrorMap& map, const ConstraintSet& set,
                              const Vector& lin, double scale,
                              const Vector& anchor, double w1, double w2,
                              double went, double winf) {
    double l_smooth = std::max(estimate_map_lipschitz(map, set) * scale, 1e-12);
    const double tol = 1e-8;
    const int budget = 10000;
    const Vector ga = map.gradient(anchor);
    Vector x = set.project(anchor);
    auto smooth_grad = [&](const Vector& v) {
        return Vector(lin + scale * (map.gradient(v) - ga));
    };
    auto smooth_val = [&](const Vector& v) {
        return lin.dot(v) + scale * map.bregman(v, anchor);
    };
    for (int it = 0; it < budget; ++it) {
        const double step = 1.0 / l_smooth;
        const Vector g = smooth_grad(x);
        const Vector c = g - x / step;
        Vector xn = composite_prox(set, c, 1.0 / step + w2, w1, went, winf);
        // If the quadratic model under-estimated the curvature, sharpen L.
        const double model = smooth_val(x) + g.dot(xn - x) +
                             0.5 * l_smooth * (xn - x).squaredNorm() + 1e-12;
        if (smooth_val(xn) > model) {
            l_smooth *= 2.0;
            continue;
        }
        const double mapping = (x - xn).norm() / step;
        x = xn;
        if (mapping <= tol) return x;
    }
    throw InnerSolverFailure(
        "proximal-gradient inner solve exhausted its budget above tolerance");
}

}  // namespace

Vector composite_prox(const ConstraintSet& set, const Vector& c, double q,
                      double l1w, double entw, double winfw) {
    if (!(q > 0.0)) throw ConfigError("composite_prox needs q > 0");
    if (c.size() != set.dim()) throw ConfigError("composite_prox size mismatch");
    switch (set.kind()) {
        case SetKind::box:
            if (winfw > 0.0)
                return composite_prox_box_maxnorm(set, c, q, l1w, entw, winfw);
            return box_separable(set, c, q, l1w, entw);
        case SetKind::euclidean_ball:
            if (winfw > 0.0 || entw > 0.0)
                throw ConfigError("ball sets support l1/quadratic regularizers only");
            return composite_prox_ball(set, c, q, l1w);
        case SetKind::simplex:
            if (winfw > 0.0)
                throw ConfigError("simplex sets do not support the max-norm term");
            return composite_prox_simplex(c, q, entw, l1w);
    }
    throw Error("unreachable set kind");
}

ProxRoute mirror_step_route(const MirrorMap& map, const ConstraintSet& set,
                            const Regularizer& reg) {
    switch (map.kind()) {
        case MirrorMapKind::euclidean_half_sq_norm:
            if (quadratic_family(reg) &&
                (set.kind() == SetKind::box ||
                 (set.kind() == SetKind::euclidean_ball &&
                  set.ball_center().isZero(0.0))))
                return {ProxPath::closed_quadratic, "threshold-clip"};
            return {ProxPath::composite, "composite-prox"};
        case MirrorMapKind::neg_entropy:
            if (set.kind() != SetKind::simplex)
                throw ConfigMismatch("neg_entropy map pairs with the simplex set");
            if (reg.w2() > 0.0 || reg.winf() > 0.0)
                throw ConfigError(
                    "neg_entropy supports zero/l1/entropy regularizers only");
            return {ProxPath::closed_entropic, "multiplicative-weights"};
        case MirrorMapKind::p_norm_sq:
            check_p_norm_box(map, set);
            return {ProxPath::iterative, "prox-gradient"};
    }
    throw Error("unreachable map kind");
}

ProxRoute dual_averaging_route(const MirrorMap& map, const ConstraintSet& set,
                               const Regularizer& reg) {
    return mirror_step_route(map, set, reg);  // same support matrix
}

Vector mirror_step(const MirrorMap& map, const ConstraintSet& set,
                   const Regularizer& reg, const Vector& g, const Vector& y,
                   double alpha) {
    if (!(alpha > 0.0)) throw ConfigError("mirror_step needs alpha > 0");
    if (g.size() != set.dim() || y.size() != set.dim())
        throw ConfigError("mirror_step size mismatch");
    const ProxRoute route = mirror_step_route(map, set, reg);
    switch (route.path) {
        case ProxPath::closed_quadratic: {
            // argmin <g,x> + ||x-y||^2/(2a) + w1||x||_1 + (w2/2)||x||^2:
            // soft-threshold y - a g at a w1, shrink by 1 + a w2, clip or scale.
            const Vector v = y - alpha * g;
            const double tau = alpha * reg.w1();
            const double denom = 1.0 + alpha * reg.w2();
            if (set.kind() == SetKind::box) {
                Vector x(v.size());
                for (int k = 0; k < v.size(); ++k)
                    x[k] = std::min(std::max(soft(v[k], tau) / denom, set.lo()[k]),
                                    set.hi()[k]);
                return x;
            }
            Vector u(v.size());
            for (int k = 0; k < v.size(); ++k) u[k] = soft(v[k], tau);
            const double scale = std::max(denom, u.norm() / set.radius());
            return u / scale;
        }
        case ProxPath::closed_entropic: {
            const Vector yc = map.clamp_domain(y);
            const double inv_a = 1.0 / alpha;
            const double denom = inv_a + reg.went();
            Vector s(y.size());
            for (int k = 0; k < y.size(); ++k)
                s[k] = (inv_a * std::log(yc[k]) - g[k] - reg.w1()) / denom;
            const double m = s.maxCoeff();
            Vector x = ((s.array() - m).exp()).matrix();
            return x / x.sum();
        }
        case ProxPath::composite: {
            // Euclidean metric: the whole step is one composite-prox solve.
            const double q = 1.0 / alpha + reg.w2();
            const Vector c = g - y / alpha;
            return composite_prox(set, c, q, reg.w1(), reg.went(), reg.winf());
        }
        case ProxPath::iterative: {
            const Vector yc = map.clamp_domain(y);
            return prox_gradient_fallback(map, set, g, 1.0 / alpha, yc, reg.w1(),
                                          reg.w2(), reg.went(), reg.winf());
        }
    }
    throw Error("unreachable prox path");
}

Vector dual_averaging_projection(const MirrorMap& map, const ConstraintSet& set,
                                 const Regularizer& reg, const Vector& z,
                                 double alpha, double t_weight) {
    if (!(alpha > 0.0)) throw ConfigError("dual_averaging_projection needs alpha > 0");
    if (t_weight < 0.0)
        throw ConfigError("dual_averaging_projection needs t_weight >= 0");
    if (z.size() != set.dim())
        throw ConfigError("dual_averaging_projection size mismatch");
    const ProxRoute route = dual_averaging_route(map, set, reg);
    const double w1 = t_weight * reg.w1();
    const double w2 = t_weight * reg.w2();
    const double went = t_weight * reg.went();
    const double winf = t_weight * reg.winf();
    switch (route.path) {
        case ProxPath::closed_quadratic: {
            const double q = 1.0 / alpha + w2;
            if (set.kind() == SetKind::box) {
                Vector x(z.size());
                for (int k = 0; k < z.size(); ++k)
                    x[k] = std::min(std::max(soft(-z[k], w1) / q, set.lo()[k]),
                                    set.hi()[k]);
                return x;
            }
            Vector u(z.size());
            for (int k = 0; k < z.size(); ++k) u[k] = soft(-z[k], w1);
            const double scale = std::max(q, u.norm() / set.radius());
            return u / scale;
        }
        case ProxPath::closed_entropic: {
            const double denom = 1.0 / alpha + went;
            Vector s = ((-z.array() - w1) / denom).matrix();
            const double m = s.maxCoeff();
            Vector x = ((s.array() - m).exp()).matrix();
            return x / x.sum();
        }
        case ProxPath::composite:
            return composite_prox(set, z, 1.0 / alpha + w2, w1, went, winf);
        case ProxPath::iterative: {
            // <z,x> + Psi(x)/a  =  <z + grad Psi(anchor)/a, x> + D(x,anchor)/a + const
            const Vector anchor = map.clamp_domain(set.center());
            const Vector lin = z + map.gradient(anchor) / alpha;
            return prox_gradient_fallback(map, set, lin, 1.0 / alpha, anchor, w1,
                                          w2, went, winf);
        }
    }
    throw Error("unreachable prox path");
}

int separate_convexity_violations(const MirrorMap& map, const ConstraintSet& set,
                                  int n_triples, std::uint64_t seed, double tol) {
    if (map.kind() == MirrorMapKind::euclidean_half_sq_norm) return 0;
    CounterRng rng = CounterRng::keyed(seed, 0x5c, 0, 0);
    int violations = 0;
    for (int s = 0; s < n_triples; ++s) {
        const Vector x = set.sample(rng);
        const Vector y1 = map.clamp_domain(set.sample(rng));
        const Vector y2 = map.clamp_domain(set.sample(rng));
        const double lam = rng.next_double();
        const Vector ym = lam * y1 + (1.0 - lam) * y2;
        const double lhs = map.bregman(x, ym);
        const double rhs = lam * map.bregman(x, y1) + (1.0 - lam) * map.bregman(x, y2);
        if (lhs > rhs + tol) ++violations;
    }
    return violations;
}

std::vector<ProxCombo> shipped_mirror_step_combos() {
    using M = MirrorMapKind;
    using S = SetKind;
    using R = RegKind;
    return {
        {M::euclidean_half_sq_norm, S::box, R::zero},
        {M::euclidean_half_sq_norm, S::box, R::l1},
        {M::euclidean_half_sq_norm, S::box, R::half_l2_sq},
        {M::euclidean_half_sq_norm, S::box, R::mixed_l1_l2},
        {M::euclidean_half_sq_norm, S::box, R::entropy},
        {M::euclidean_half_sq_norm, S::box, R::linf},
        {M::euclidean_half_sq_norm, S::euclidean_ball, R::zero},
        {M::euclidean_half_sq_norm, S::euclidean_ball, R::l1},
        {M::euclidean_half_sq_norm, S::euclidean_ball, R::half_l2_sq},
        {M::euclidean_half_sq_norm, S::euclidean_ball, R::mixed_l1_l2},
        {M::euclidean_half_sq_norm, S::simplex, R::zero},
        {M::euclidean_half_sq_norm, S::simplex, R::l1},
        {M::euclidean_half_sq_norm, S::simplex, R::half_l2_sq},
        {M::euclidean_half_sq_norm, S::simplex, R::entropy},
        {M::neg_entropy, S::simplex, R::zero},
        {M::neg_entropy, S::simplex, R::l1},
        {M::neg_entropy, S::simplex, R::entropy},
        {M::p_norm_sq, S::box, R::zero},
        {M::p_norm_sq, S::box, R::l1},
        {M::p_norm_sq, S::box, R::half_l2_sq},
        {M::p_norm_sq, S::box, R::mixed_l1_l2},
    };
}

std::vector<ProxCombo> shipped_dual_averaging_combos() {
    return shipped_mirror_step_combos();
}

}  // namespace noisyopt
