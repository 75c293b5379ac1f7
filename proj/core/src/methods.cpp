#include "noisyopt/methods.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "noisyopt/prox.hpp"

namespace noisyopt {

std::vector<long> checkpoint_grid(long horizon, int count) {
    if (horizon < 1) throw ConfigError("checkpoint grid needs horizon >= 1");
    if (count <= 0) {
        const double dec = std::log10(static_cast<double>(horizon));
        count = static_cast<int>(std::min(200.0, std::max(1.0, std::ceil(40.0 * dec))));
    }
    std::vector<long> grid;
    grid.reserve(count + 2);
    grid.push_back(1);
    const double lo = 0.0, hi = std::log(static_cast<double>(horizon));
    for (int k = 0; k < count; ++k) {
        const double u = count == 1 ? 1.0 : static_cast<double>(k) / (count - 1);
        const long t = std::lround(std::exp(lo + u * (hi - lo)));
        grid.push_back(std::clamp<long>(t, 1, horizon));
    }
    grid.push_back(horizon);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

namespace {

/* Memoizes weight matrices when the schedule repeats them. */
class WeightCache {
  public:
    explicit WeightCache(const TopologySchedule& topology) : topology_(topology) {}

    const Matrix& at(long t) {
        if (topology_.kind() == TopologyKind::random_b_connected) {
            scratch_ = topology_.weight_matrix(t);  // fresh draw per step
            return scratch_;
        }
        const long key = topology_.kind() == TopologyKind::static_ring
                             ? 0
                             : t % topology_.window();
        auto it = cache_.find(key);
        if (it == cache_.end())
            it = cache_.emplace(key, topology_.weight_matrix(t)).first;
        return it->second;
    }

  private:
    const TopologySchedule& topology_;
    std::unordered_map<long, Matrix> cache_;
    Matrix scratch_;
};

struct Recorder {
    const CompositeProblem& problem;
    const RunConfig& cfg;
    RunTrace trace;
    std::vector<Vector> avg_sum;          // sum of iterates t = 1..now, per agent
    std::vector<double> min_inst;         // running min of F(x_i^s)
    std::vector<double> disagreement_sum; // per reference agent
    std::size_t next_checkpoint = 0;

    Recorder(const CompositeProblem& p, const RunConfig& c)
        : problem(p), cfg(c) {
        avg_sum.assign(p.n_agents, Vector::Zero(p.dim));
        min_inst.assign(p.n_agents, std::numeric_limits<double>::infinity());
        disagreement_sum.assign(p.n_agents, 0.0);
    }

    /* Called once per step with the freshly produced iterate index t >= 1. */
    void absorb(long t, const std::vector<Vector>& x,
                const std::vector<double>& step_norm,
                const std::vector<Vector>* z) {
        const int n = problem.n_agents;
        for (int i = 0; i < n; ++i) avg_sum[i] += x[i];
        double max_pair = 0.0;
        if (cfg.track_pairwise && n > 1) {
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += (x[i] - x[j]).norm();
                disagreement_sum[j] += s;
                for (int i = j + 1; i < n; ++i)
                    max_pair = std::max(max_pair, (x[i] - x[j]).norm());
            }
        }
        const bool due = next_checkpoint < cfg.checkpoints.size() &&
                         cfg.checkpoints[next_checkpoint] == t;
        // Exact running minimum for the record agent only; other agents are
        // sampled at checkpoints, which can only overstate their minimum.
        min_inst[0] = std::min(min_inst[0], problem.value(x[0]));
        if (!due) return;
        std::vector<double> inst(n);
        for (int i = 0; i < n; ++i) {
            inst[i] = problem.value(x[i]);
            if (i > 0) min_inst[i] = std::min(min_inst[i], inst[i]);
        }
        CheckpointRecord rec;
        rec.t = t;
        rec.inst_value = std::move(inst);
        rec.min_inst_value = min_inst;
        rec.step_norm = step_norm;
        rec.disagreement = disagreement_sum;
        rec.iterate = x;
        rec.max_pairwise = max_pair;
        rec.avg_value.resize(n);
        for (int i = 0; i < n; ++i)
            rec.avg_value[i] = problem.value(avg_sum[i] / static_cast<double>(t));
        if (z != nullptr) {
            Vector zbar = Vector::Zero(problem.dim);
            for (const auto& zi : *z) zbar += zi;
            zbar /= static_cast<double>(n);
            rec.dual_deviation.resize(n);
            for (int i = 0; i < n; ++i)
                rec.dual_deviation[i] = ((*z)[i] - zbar).norm();
        }
        trace.records.push_back(std::move(rec));
        ++next_checkpoint;
    }
};

}  // namespace

RunTrace run_trial(const CompositeProblem& problem, const MirrorMap& map,
                   const TopologySchedule& topology,
                   const LinkNoiseSampler& noise,
                   const StochasticSubgradientOracle& oracle,
                   const RunConfig& cfg) {
    problem.validate();
    if (topology.n_agents() != problem.n_agents)
        throw ConfigMismatch("topology and problem disagree on the agent count");
    if (cfg.horizon < 1) throw ConfigError("run needs horizon >= 1");

    RunConfig local = cfg;
    if (local.checkpoints.empty())
        local.checkpoints = checkpoint_grid(local.horizon);

    const int n = problem.n_agents;
    const int dim = problem.dim;
    WeightCache weights(topology);
    Recorder rec(problem, local);

    // Initial primal states.
    std::vector<Vector> x(n);
    Vector x0;
    if (local.init_override) {
        x0 = *local.init_override;
        if (x0.size() != dim) throw ConfigError("init_override dimension mismatch");
        if (!problem.set.contains(x0, 1e-9))
            throw ConfigError("init_override lies outside the feasible set");
    } else if (cfg.method == Method::dual_averaging) {
        // Minimizer of the prox function over the set (z = 0, zero weight).
        x0 = dual_averaging_projection(map, problem.set, Regularizer::zero(),
                                       Vector::Zero(dim), 1.0, 0.0);
    } else {
        x0 = problem.set.center();
    }
    for (int i = 0; i < n; ++i) x[i] = x0;

    RunTrace& trace = rec.trace;
    trace.init_norms.resize(n);
    for (int i = 0; i < n; ++i) trace.init_norms[i] = x[i].norm();

    std::vector<Vector> z;
    if (cfg.method == Method::dual_averaging)
        z.assign(n, Vector::Zero(dim));

    std::vector<Vector> next(n);
    std::vector<double> step_norm(n, 0.0);

    for (long t = 0; t < local.horizon; ++t) {
        const Matrix& w = weights.at(t);
        const double alpha = local.steps.at(t);
        const double r = local.decay.at(t);

        if (cfg.method == Method::mirror_descent) {
            for (int i = 0; i < n; ++i) {
                // Mixed point: an agent reads its own state exactly, every
                // other incoming state through the noisy link.
                Vector y = w(i, i) * x[i];
                for (int j = 0; j < n; ++j) {
                    if (j == i || w(i, j) == 0.0) continue;
                    Vector received = x[j];
                    if (r > 0.0) received += r * noise.sample(i, j, t, dim);
                    y += w(i, j) * received;
                }
                const Vector g = oracle.sample(problem, i, y, t);
                next[i] = mirror_step(map, problem.set,
                                      problem.agent_regularizer(i), g, y, alpha);
                step_norm[i] = (next[i] - y).norm();
            }
        } else {
            // Dual states mix over the noisy links, then absorb the fresh
            // subgradient taken at the current primal iterate.
            std::vector<Vector> znext(n);
            for (int i = 0; i < n; ++i) {
                Vector zi = w(i, i) * z[i];
                for (int j = 0; j < n; ++j) {
                    if (j == i || w(i, j) == 0.0) continue;
                    Vector received = z[j];
                    if (r > 0.0) received += r * noise.sample(i, j, t, dim);
                    zi += w(i, j) * received;
                }
                zi += oracle.sample(problem, i, x[i], t);
                znext[i] = std::move(zi);
            }
            for (int i = 0; i < n; ++i) {
                next[i] = dual_averaging_projection(
                    map, problem.set, problem.agent_regularizer(i), znext[i],
                    alpha, static_cast<double>(t));
                step_norm[i] = (next[i] - x[i]).norm();
            }
            z = std::move(znext);
        }

        x.swap(next);
        rec.absorb(t + 1, x, step_norm,
                   cfg.method == Method::dual_averaging ? &z : nullptr);
    }
    return rec.trace;
}

}  // namespace noisyopt
