#include "noisyopt/topology.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "noisyopt/rng.hpp"

namespace noisyopt {

namespace {

std::vector<std::pair<int, int>> ring_edges(int n) {
    std::vector<std::pair<int, int>> edges;
    if (n == 2) {
        edges.emplace_back(0, 1);
    } else if (n >= 3) {
        for (int i = 0; i < n; ++i) {
            int j = (i + 1) % n;
            edges.emplace_back(std::min(i, j), std::max(i, j));
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

/* Random recursive spanning tree on n nodes with randomly permuted labels. */
std::vector<std::pair<int, int>> random_spanning_tree(int n, CounterRng& rng) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[static_cast<int>(rng.next_below(i + 1))]);
    std::vector<std::pair<int, int>> edges;
    for (int k = 1; k < n; ++k) {
        int a = perm[k];
        int b = perm[static_cast<int>(rng.next_below(k))];
        edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    return edges;
}

}  // namespace

TopologySchedule::TopologySchedule(int n_agents, int window, double theta,
                                   TopologyKind kind, std::uint64_t seed)
    : n_(n_agents), window_(window), theta_(theta), kind_(kind), seed_(seed) {
    if (n_ < 1 || n_ > 64)
        throw ConfigError("n_agents must be in [1, 64], got " + std::to_string(n_));
    if (window_ < 1)
        throw InvalidWindow("window must be >= 1, got " + std::to_string(window_));
    if (!(theta_ > 0.0) || theta_ > 1.0 / n_)
        throw InfeasibleTheta("theta must lie in (0, 1/n_agents]; got " +
                              format_double(theta_) + " with n_agents = " +
                              std::to_string(n_));
    ring_ = ring_edges(n_);
}

std::vector<std::pair<int, int>> TopologySchedule::active_edges(long t) const {
    if (t < 0) throw IndexOrder("step index must be >= 0");
    switch (kind_) {
        case TopologyKind::static_ring:
            return ring_;
        case TopologyKind::periodic_partition: {
            // Round-robin: ring edge k is live whenever t == k (mod window), so
            // any `window` consecutive steps activate the whole ring.
            std::vector<std::pair<int, int>> edges;
            for (std::size_t k = 0; k < ring_.size(); ++k)
                if (static_cast<long>(k % window_) == t % window_)
                    edges.push_back(ring_[k]);
            return edges;
        }
        case TopologyKind::random_b_connected: {
            // Per aligned window: spread a random spanning tree across the
            // window's steps, then sprinkle one extra random edge per step.
            const long w = t / window_;
            const long slot = t % window_;
            CounterRng rng = CounterRng::keyed(seed_, 0x77u, static_cast<std::uint64_t>(w));
            std::set<std::pair<int, int>> edges;
            auto tree = random_spanning_tree(n_, rng);
            for (int i = n_ - 1; i > 0; --i)
                std::swap(tree[i - 1], tree[static_cast<int>(rng.next_below(i))]);
            for (std::size_t k = 0; k < tree.size(); ++k)
                if (static_cast<long>(k % window_) == slot) edges.insert(tree[k]);
            for (long s = 0; s <= slot; ++s) {
                int a = static_cast<int>(rng.next_below(n_));
                int b = static_cast<int>(rng.next_below(n_));
                if (s == slot && a != b)
                    edges.insert({std::min(a, b), std::max(a, b)});
            }
            return {edges.begin(), edges.end()};
        }
    }
    throw Error("unreachable topology kind");
}

Matrix TopologySchedule::weight_matrix(long t) const {
    Matrix w = metropolis_weights(n_, active_edges(t), theta_);
    sinkhorn_repair(w);
    return w;
}

MixingConstants TopologySchedule::mixing() const {
    const double base = 1.0 - theta_ / (4.0 * n_ * n_);
    return {std::pow(base, -2.0), std::pow(base, 1.0 / window_)};
}

Matrix metropolis_weights(int n, const std::vector<std::pair<int, int>>& edges,
                          double theta) {
    std::vector<int> deg(n, 0);
    for (auto [i, j] : edges) {
        ++deg[i];
        ++deg[j];
    }
    Matrix w = Matrix::Zero(n, n);
    for (auto [i, j] : edges) {
        const double v = std::max(theta, 1.0 / (1.0 + std::max(deg[i], deg[j])));
        w(i, j) = v;
        w(j, i) = v;
    }
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j) off += w(i, j);
        w(i, i) = 1.0 - off;
    }
    return w;
}

int sinkhorn_repair(Matrix& w, int max_sweeps, double tol) {
    const auto deviation = [&w]() {
        double d = 0.0;
        for (int i = 0; i < w.rows(); ++i) {
            d = std::max(d, std::abs(w.row(i).sum() - 1.0));
            d = std::max(d, std::abs(w.col(i).sum() - 1.0));
        }
        return d;
    };
    int sweeps = 0;
    while (deviation() > tol && sweeps < max_sweeps) {
        for (int i = 0; i < w.rows(); ++i) w.row(i) /= w.row(i).sum();
        for (int j = 0; j < w.cols(); ++j) w.col(j) /= w.col(j).sum();
        ++sweeps;
    }
    return sweeps;
}

Matrix transition_product(const TopologySchedule& sched, long t, long s) {
    if (t < s - 1)
        throw IndexOrder("transition product needs t >= s - 1; got t = " +
                         std::to_string(t) + ", s = " + std::to_string(s));
    const int n = sched.n_agents();
    Matrix prod = Matrix::Identity(n, n);
    for (long tau = s; tau <= t; ++tau) prod = sched.weight_matrix(tau) * prod;
    return prod;
}

}  // namespace noisyopt
