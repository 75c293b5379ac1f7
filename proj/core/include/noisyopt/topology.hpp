#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "noisyopt/common.hpp"

namespace noisyopt {

enum class TopologyKind { static_ring, periodic_partition, random_b_connected };

/*
 * Constants of the geometric consensus envelope: every entry of the backward
 * product of weight matrices approaches 1/N at rate
 *   |[P(t,s)]_ij - 1/N| <= big_theta * gamma^(t-s).
 */
struct MixingConstants {
    double big_theta;
    double gamma;
};

/*
 * Deterministic time-varying communication schedule. Edges are undirected
 * (messages flow both ways), self-loops are always present, and the union of
 * active edges over every aligned window of `window` consecutive steps is a
 * connected graph. Weight matrices are symmetric, doubly stochastic, and every
 * active entry (including the diagonal) is at least `theta`.
 */
class TopologySchedule {
  public:
    TopologySchedule(int n_agents, int window, double theta, TopologyKind kind,
                     std::uint64_t seed);

    int n_agents() const { return n_; }
    int window() const { return window_; }
    double theta() const { return theta_; }
    TopologyKind kind() const { return kind_; }
    std::uint64_t seed() const { return seed_; }

    /* Active undirected edges (i < j, no self-loops) at step t >= 0. */
    std::vector<std::pair<int, int>> active_edges(long t) const;

    /* Consensus weight matrix at step t >= 0. */
    Matrix weight_matrix(long t) const;

    MixingConstants mixing() const;

  private:
    int n_;
    int window_;
    double theta_;
    TopologyKind kind_;
    std::uint64_t seed_;
    std::vector<std::pair<int, int>> ring_;  // undirected ring edge list
};

/*
 * Backward product P^t P^(t-1) ... P^s of weight matrices (t >= s - 1).
 * t == s - 1 yields the identity. Throws IndexOrder for t < s - 1.
 */
Matrix transition_product(const TopologySchedule& sched, long t, long s);

/* Lazy Metropolis weights on an undirected edge set, exactly doubly stochastic. */
Matrix metropolis_weights(int n, const std::vector<std::pair<int, int>>& edges,
                          double theta);

/*
 * Rescale rows/columns toward double stochasticity (alternating normalization,
 * at most `max_sweeps` passes, stopping when every row and column sum is within
 * `tol` of one). Returns the number of sweeps performed.
 */
int sinkhorn_repair(Matrix& w, int max_sweeps = 200, double tol = 1e-13);

}  // namespace noisyopt
