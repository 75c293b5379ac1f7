#include "noisyopt/problems.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "noisyopt/prox.hpp"
#include "noisyopt/rng.hpp"

namespace noisyopt {

namespace {

double spectral_norm(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.transpose() * a);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace

double LocalObjective::value(const Vector& x) const {
    switch (kind) {
        case ObjectiveKind::abs_regression:
            return (A * x - b).lpNorm<1>() / A.rows();
        case ObjectiveKind::hinge: {
            double s = 0.0;
            const Vector m = A * x;
            for (int r = 0; r < A.rows(); ++r)
                s += std::max(0.0, 1.0 - b[r] * m[r]);
            return s / A.rows();
        }
        case ObjectiveKind::quadratic:
            return 0.5 * (A * x - b).squaredNorm() / A.rows();
        case ObjectiveKind::linear:
            return c.dot(x);
    }
    throw Error("unreachable objective kind");
}

Vector LocalObjective::subgradient(const Vector& x) const {
    switch (kind) {
        case ObjectiveKind::abs_regression: {
            const Vector r = A * x - b;
            Vector s(r.size());
            for (int k = 0; k < r.size(); ++k)
                s[k] = r[k] > 0.0 ? 1.0 : (r[k] < 0.0 ? -1.0 : 0.0);
            return A.transpose() * s / A.rows();
        }
        case ObjectiveKind::hinge: {
            const Vector m = A * x;
            Vector g = Vector::Zero(x.size());
            for (int r = 0; r < A.rows(); ++r)
                if (b[r] * m[r] < 1.0) g -= b[r] * A.row(r).transpose();
            return g / A.rows();
        }
        case ObjectiveKind::quadratic:
            return A.transpose() * (A * x - b) / A.rows();
        case ObjectiveKind::linear:
            return c;
    }
    throw Error("unreachable objective kind");
}

double LocalObjective::grad_bound(double radius) const {
    switch (kind) {
        case ObjectiveKind::abs_regression:
        case ObjectiveKind::hinge: {
            double s = 0.0;
            for (int r = 0; r < A.rows(); ++r) s += A.row(r).norm();
            return s / A.rows();
        }
        case ObjectiveKind::quadratic: {
            const double na = spectral_norm(A);
            return na * (na * radius + b.norm()) / A.rows();
        }
        case ObjectiveKind::linear:
            return c.norm();
    }
    throw Error("unreachable objective kind");
}

void CompositeProblem::validate() const {
    if (n_agents < 1) throw ConfigError("problem needs n_agents >= 1");
    if (static_cast<int>(objectives.size()) != n_agents)
        throw ConfigError("problem needs one objective per agent");
    if (set.dim() != dim) throw ConfigError("set dimension mismatch");
    if (variant == ProblemVariant::local_reg) {
        if (static_cast<int>(local_regs.size()) != n_agents)
            throw ConfigError("local_reg variant needs one regularizer per agent");
    } else if (!local_regs.empty()) {
        throw ConfigError("global_reg variant takes a single shared regularizer");
    }
    for (const auto& o : objectives) {
        const int d = o.kind == ObjectiveKind::linear
                          ? static_cast<int>(o.c.size())
                          : static_cast<int>(o.A.cols());
        if (d != dim) throw ConfigError("objective dimension mismatch");
    }
}

double CompositeProblem::local_f(int agent, const Vector& x) const {
    return objectives[agent].value(x);
}

Vector CompositeProblem::local_subgradient(int agent, const Vector& x) const {
    return objectives[agent].subgradient(x);
}

const Regularizer& CompositeProblem::agent_regularizer(int agent) const {
    return variant == ProblemVariant::local_reg ? local_regs[agent] : global_reg;
}

double CompositeProblem::value(const Vector& x) const {
    double s = 0.0;
    if (variant == ProblemVariant::local_reg) {
        for (int i = 0; i < n_agents; ++i)
            s += objectives[i].value(x) + local_regs[i].value(x);
    } else {
        for (int i = 0; i < n_agents; ++i) s += objectives[i].value(x);
        s = s / n_agents + global_reg.value(x);
    }
    return s;
}

double CompositeProblem::grad_bound(double inflation) const {
    const double radius = set.max_norm() + inflation;
    double g = 0.0;
    for (const auto& o : objectives) g = std::max(g, o.grad_bound(radius));
    return g;
}

double CompositeProblem::reg_bound() const {
    if (variant == ProblemVariant::global_reg)
        return global_reg.lipschitz_on(set);
    double g = 0.0;
    for (const auto& r : local_regs) g = std::max(g, r.lipschitz_on(set));
    return g;
}

Vector StochasticSubgradientOracle::sample(const CompositeProblem& problem,
                                           int agent, const Vector& x,
                                           long t) const {
    Vector g = problem.local_subgradient(agent, x);
    if (sigma > 0.0) {
        CounterRng rng = CounterRng::keyed(seed, 0x9f, static_cast<std::uint64_t>(agent) + 1,
                                          static_cast<std::uint64_t>(t));
        if (bounded) {
            g += rng.ball_vector(problem.dim, sigma);
        } else {
            g += sigma * rng.normal_vector(problem.dim);
        }
    }
    return g;
}

double StochasticSubgradientOracle::g_bound(const CompositeProblem& problem,
                                            double inflation) const {
    const double clean = problem.grad_bound(inflation);
    if (sigma <= 0.0) return clean;
    return bounded ? clean + sigma
                   : std::sqrt(clean * clean + sigma * sigma * problem.dim);
}

// ---------------------------------------------------------------------------
// Reference solver
// ---------------------------------------------------------------------------

namespace {

struct FullObjective {
    const CompositeProblem& p;
    double operator()(const Vector& x) const { return p.value(x); }
    Vector subgradient(const Vector& x) const {
        Vector g = Vector::Zero(p.dim);
        if (p.variant == ProblemVariant::local_reg) {
            for (int i = 0; i < p.n_agents; ++i)
                g += p.objectives[i].subgradient(x) + p.local_regs[i].subgradient(x);
        } else {
            for (int i = 0; i < p.n_agents; ++i) g += p.objectives[i].subgradient(x);
            g = g / p.n_agents + p.global_reg.subgradient(x);
        }
        return g;
    }
};

bool all_linear(const CompositeProblem& p) {
    for (const auto& o : p.objectives)
        if (o.kind != ObjectiveKind::linear) return false;
    return true;
}

bool regs_zero(const CompositeProblem& p) {
    if (p.variant == ProblemVariant::global_reg) return p.global_reg.is_zero();
    for (const auto& r : p.local_regs)
        if (!r.is_zero()) return false;
    return true;
}

bool smooth_prox_friendly(const CompositeProblem& p) {
    for (const auto& o : p.objectives)
        if (!o.smooth()) return false;
    auto ok = [](const Regularizer& r) { return r.winf() == 0.0 && r.went() == 0.0; };
    if (p.variant == ProblemVariant::global_reg) return ok(p.global_reg);
    for (const auto& r : p.local_regs)
        if (!ok(r)) return false;
    return true;
}

/* Aggregate l1 / quadratic weights of the composite part. */
void total_reg_weights(const CompositeProblem& p, double* w1, double* w2) {
    *w1 = *w2 = 0.0;
    if (p.variant == ProblemVariant::global_reg) {
        *w1 = p.global_reg.w1();
        *w2 = p.global_reg.w2();
        return;
    }
    for (const auto& r : p.local_regs) {
        *w1 += r.w1();
        *w2 += r.w2();
    }
}

/* Gradient and curvature of the smooth part (objectives only). */
struct SmoothPart {
    explicit SmoothPart(const CompositeProblem& p) : p_(p) {
        const double w = p.variant == ProblemVariant::global_reg
                             ? 1.0 / p.n_agents
                             : 1.0;
        hess_ = Matrix::Zero(p.dim, p.dim);
        lin_ = Vector::Zero(p.dim);
        for (const auto& o : p.objectives) {
            if (o.kind == ObjectiveKind::quadratic) {
                hess_ += w * o.A.transpose() * o.A / o.A.rows();
                lin_ -= w * o.A.transpose() * o.b / o.A.rows();
            } else {
                lin_ += w * o.c;
            }
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(hess_);
        lipschitz_ = std::max(1e-12, es.eigenvalues().maxCoeff());
    }
    Vector gradient(const Vector& x) const { return hess_ * x + lin_; }
    const Matrix& hessian() const { return hess_; }
    const Vector& linear() const { return lin_; }
    double lipschitz() const { return lipschitz_; }

  private:
    const CompositeProblem& p_;
    Matrix hess_;
    Vector lin_;
    double lipschitz_;
};

/* FISTA on smooth + l1/quadratic composite over the set. */
Vector fista_solve(const CompositeProblem& p, const SmoothPart& sp, Vector x0,
                   long iters) {
    double w1, w2;
    total_reg_weights(p, &w1, &w2);
    const double L = sp.lipschitz() + 1e-12;
    Vector x = p.set.project(std::move(x0));
    Vector y = x;
    double tk = 1.0;
    for (long k = 0; k < iters; ++k) {
        const Vector g = sp.gradient(y);
        const Vector c = g - L * y;
        Vector xn = composite_prox(p.set, c, L + w2, w1, 0.0, 0.0);
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        y = xn + ((tk - 1.0) / tn) * (xn - x);
        if ((xn - x).norm() * L < 1e-12 && k > 50) {
            x = std::move(xn);
            break;
        }
        x = std::move(xn);
        tk = tn;
    }
    return x;
}

/*
 * Projected subgradient with a moving Polyak target. The target sits delta
 * below the best value seen; delta halves when progress stalls, which recovers
 * near-linear convergence on sharp (polyhedral) objectives.
 */
Vector polyak_solve(const CompositeProblem& p, const FullObjective& fo, Vector x,
                    long iters, double* best_val) {
    x = p.set.project(std::move(x));
    Vector best_x = x;
    double best_f = fo(x);
    double delta = std::max(1e-3, 0.1 * std::abs(best_f));
    double stall_anchor = best_f;
    long stall_timer = 0;
    for (long k = 0; k < iters; ++k) {
        const double f = fo(x);
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
        const Vector g = fo.subgradient(x);
        const double gn2 = g.squaredNorm();
        if (gn2 < 1e-26) break;
        const double target = best_f - delta;
        const double step = (f - target) / gn2;
        x = p.set.project(x - step * g);
        if (++stall_timer >= 500) {
            if (stall_anchor - best_f < 0.25 * delta) delta *= 0.5;
            stall_anchor = best_f;
            stall_timer = 0;
            if (delta < 1e-14) break;
        }
    }
    *best_val = best_f;
    return best_x;
}

}  // namespace

ReferenceSolution solve_reference(const CompositeProblem& problem,
                                  const ReferenceOptions& opts) {
    problem.validate();
    const FullObjective fo{problem};
    ReferenceSolution out;
    CounterRng rng = CounterRng::keyed(opts.seed, 0x5ef);

    if (all_linear(problem) && problem.set.kind() == SetKind::simplex &&
        regs_zero(problem)) {
        // Linear over the simplex: exact vertex minimum.
        Vector w = Vector::Zero(problem.dim);
        for (const auto& o : problem.objectives) w += o.c;
        if (problem.variant == ProblemVariant::global_reg) w /= problem.n_agents;
        int arg = 0;
        for (int k = 1; k < problem.dim; ++k)
            if (w[k] < w[arg]) arg = k;
        out.x_star = Vector::Zero(problem.dim);
        out.x_star[arg] = 1.0;
        out.f_star = fo(out.x_star);
        out.method = "simplex-vertex";
        out.cross_checked = true;
        return out;
    }

    const long per_restart = std::max<long>(1000, opts.budget / opts.restarts);
    std::vector<double> finals;
    Vector best_x;
    double best_f = std::numeric_limits<double>::infinity();

    if (smooth_prox_friendly(problem)) {
        const SmoothPart sp(problem);
        for (int r = 0; r < opts.restarts; ++r) {
            Vector x0 = r == 0 ? problem.set.center() : problem.set.sample(rng);
            Vector xr = fista_solve(problem, sp, std::move(x0),
                                    std::min<long>(per_restart, 200000));
            const double f = fo(xr);
            finals.push_back(f);
            if (f < best_f) {
                best_f = f;
                best_x = std::move(xr);
            }
        }
        out.method = "fista";
        // Independent route: closed-form stationary point when it is interior.
        double w1, w2;
        total_reg_weights(problem, &w1, &w2);
        if (w1 == 0.0) {
            const Matrix h = sp.hessian() + w2 * Matrix::Identity(problem.dim, problem.dim);
            const Vector xu = h.ldlt().solve(-sp.linear());
            if (problem.set.contains(xu, -1e-9)) {
                if (std::abs(fo(xu) - best_f) > 1e-7)
                    throw ReferenceSolveUnverified(
                        "closed-form stationary point disagrees with the iterative "
                        "route");
                out.cross_checked = true;
            }
        }
        if (!out.cross_checked) {
            // Second route: Polyak subgradient from the best point's antipode.
            double pf = 0.0;
            polyak_solve(problem, fo, problem.set.sample(rng),
                         std::min<long>(per_restart, 200000), &pf);
            if (pf < best_f - 1e-6)
                throw ReferenceSolveUnverified(
                    "subgradient route found a better value than the proximal "
                    "route");
            if (std::abs(pf - best_f) <= 1e-5) out.cross_checked = true;
        }
    } else {
        for (int r = 0; r < opts.restarts; ++r) {
            Vector x0 = r == 0 ? problem.set.center() : problem.set.sample(rng);
            double f = 0.0;
            Vector xr = polyak_solve(problem, fo, std::move(x0), per_restart, &f);
            finals.push_back(f);
            if (f < best_f) {
                best_f = f;
                best_x = std::move(xr);
            }
        }
        out.method = "polyak-subgradient";
        out.cross_checked = finals.size() > 1;
    }

    out.x_star = best_x;
    out.f_star = best_f;
    for (double f : finals)
        out.restart_spread = std::max(out.restart_spread, f - best_f);
    if (out.restart_spread > opts.agree_tol)
        throw ReferenceSolveUnverified("restart spread " +
                                       format_double(out.restart_spread) +
                                       " exceeds " + format_double(opts.agree_tol));

    // Probe certificate: no feasible point may beat the reported optimum.
    for (int s = 0; s < 500; ++s) {
        const Vector probe = problem.set.sample(rng);
        if (fo(probe) < out.f_star - 1e-9)
            throw ReferenceSolveUnverified("random feasible point beats f_star");
    }
    for (int s = 0; s < 100; ++s) {
        Vector dir = rng.normal_vector(problem.dim);
        if (dir.norm() == 0.0) continue;
        dir.normalize();
        const Vector probe = problem.set.project(out.x_star + 1e-5 * dir);
        if (fo(probe) < out.f_star - 1e-9)
            throw ReferenceSolveUnverified("local perturbation beats f_star");
    }
    return out;
}

}  // namespace noisyopt
