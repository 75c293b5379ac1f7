#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "noisyopt/topology.hpp"

using namespace noisyopt;

namespace {

double stochasticity_gap(const Matrix& w) {
    double d = 0.0;
    for (int i = 0; i < w.rows(); ++i) {
        d = std::max(d, std::abs(w.row(i).sum() - 1.0));
        d = std::max(d, std::abs(w.col(i).sum() - 1.0));
    }
    return d;
}

bool union_is_connected(int n,
                        const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (auto [i, j] : edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                q.push(v);
            }
    }
    return reached == n;
}

}  // namespace

TEST_CASE("two-agent half-weight network has exact rational mixing constants") {
    TopologySchedule sched(2, 1, 0.5, TopologyKind::static_ring, 1);
    const MixingConstants mc = sched.mixing();
    CHECK(mc.big_theta == doctest::Approx(1024.0 / 961.0).epsilon(1e-15));
    CHECK(mc.gamma == doctest::Approx(0.96875).epsilon(1e-15));
}

TEST_CASE("mixing decay takes the window-th root of the per-window factor") {
    TopologySchedule sched(4, 2, 0.1, TopologyKind::periodic_partition, 3);
    const MixingConstants mc = sched.mixing();
    const double base = 1.0 - 0.1 / 64.0;
    CHECK(mc.gamma == doctest::Approx(std::sqrt(base)).epsilon(1e-15));
    CHECK(mc.big_theta == doctest::Approx(std::pow(base, -2.0)).epsilon(1e-15));
    CHECK(mc.big_theta > 1.0);
    CHECK(mc.gamma > 0.0);
    CHECK(mc.gamma < 1.0);
}

TEST_CASE("two agents with the maximal weight floor split weights evenly") {
    TopologySchedule sched(2, 1, 0.5, TopologyKind::static_ring, 1);
    const Matrix w = sched.weight_matrix(0);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(w(i, j) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("constructor rejects infeasible floors, bad windows, bad counts") {
    CHECK_THROWS_AS(
        TopologySchedule(2, 1, 0.6, TopologyKind::static_ring, 1),
        InfeasibleTheta);
    CHECK_THROWS_AS(
        TopologySchedule(2, 1, 0.0, TopologyKind::static_ring, 1),
        InfeasibleTheta);
    CHECK_THROWS_AS(
        TopologySchedule(2, 0, 0.5, TopologyKind::static_ring, 1),
        InvalidWindow);
    CHECK_THROWS_AS(
        TopologySchedule(0, 1, 0.5, TopologyKind::static_ring, 1), ConfigError);
}

TEST_CASE("weight matrices are symmetric, doubly stochastic, floored, sparse") {
    const struct {
        TopologyKind kind;
        int window;
    } cases[] = {{TopologyKind::static_ring, 1},
                 {TopologyKind::periodic_partition, 3},
                 {TopologyKind::random_b_connected, 3}};
    const int n = 6;
    const double theta = 0.1;
    for (const auto& cs : cases) {
        TopologySchedule sched(n, cs.window, theta, cs.kind, 5);
        for (long t = 0; t < 3 * cs.window; ++t) {
            const Matrix w = sched.weight_matrix(t);
            CHECK(stochasticity_gap(w) <= 1e-12);
            CHECK((w - w.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
            const auto edges = sched.active_edges(t);
            std::set<std::pair<int, int>> live(edges.begin(), edges.end());
            for (int i = 0; i < n; ++i) {
                CHECK(w(i, i) >= theta - 1e-12);
                for (int j = i + 1; j < n; ++j) {
                    if (live.count({i, j})) {
                        CHECK(w(i, j) >= theta - 1e-12);
                    } else {
                        CHECK(w(i, j) == 0.0);
                    }
                    CHECK(w(i, j) <= 1.0 + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("every aligned window of active edges forms a connected graph") {
    TopologySchedule periodic(4, 2, 0.2, TopologyKind::periodic_partition, 1);
    TopologySchedule random(5, 3, 0.1, TopologyKind::random_b_connected, 17);
    for (const TopologySchedule* sched : {&periodic, &random}) {
        const int b = sched->window();
        for (long w = 0; w < 5; ++w) {
            std::vector<std::pair<int, int>> merged;
            for (long s = 0; s < b; ++s) {
                const auto edges = sched->active_edges(w * b + s);
                merged.insert(merged.end(), edges.begin(), edges.end());
            }
            CHECK(union_is_connected(sched->n_agents(), merged));
        }
    }
}

TEST_CASE("periodic schedules repeat with the window period") {
    TopologySchedule sched(5, 3, 0.1, TopologyKind::periodic_partition, 2);
    for (long t = 0; t < 6; ++t) {
        const Matrix a = sched.weight_matrix(t);
        const Matrix b = sched.weight_matrix(t + 3);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
        CHECK(sched.active_edges(t) == sched.active_edges(t + 3));
    }
}

TEST_CASE("same constructor arguments replay the same schedule") {
    TopologySchedule a(5, 2, 0.1, TopologyKind::random_b_connected, 99);
    TopologySchedule b(5, 2, 0.1, TopologyKind::random_b_connected, 99);
    for (long t = 0; t < 8; ++t) {
        CHECK(a.active_edges(t) == b.active_edges(t));
        CHECK((a.weight_matrix(t) - b.weight_matrix(t)).cwiseAbs().maxCoeff() ==
              0.0);
    }
}

TEST_CASE("empty backward product is the identity") {
    TopologySchedule sched(3, 1, 0.2, TopologyKind::static_ring, 1);
    const Matrix p = transition_product(sched, 0, 1);
    CHECK((p - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward product rejects end before start") {
    TopologySchedule sched(3, 1, 0.2, TopologyKind::static_ring, 1);
    CHECK_THROWS_AS(transition_product(sched, 0, 2), IndexOrder);
}

TEST_CASE("two-agent products are idempotent at the even-split matrix") {
    TopologySchedule sched(2, 1, 0.5, TopologyKind::static_ring, 1);
    const Matrix p = transition_product(sched, 5, 1);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(p(i, j) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("long products stay doubly stochastic and contract geometrically") {
    TopologySchedule sched(4, 2, 0.1, TopologyKind::random_b_connected, 7);
    const long t = 40, s = 1;
    const Matrix p = transition_product(sched, t, s);
    CHECK(stochasticity_gap(p) <= 1e-8);
    const MixingConstants mc = sched.mixing();
    const double envelope = mc.big_theta * std::pow(mc.gamma, t - s);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(std::abs(p(i, j) - 0.25) <= envelope);
}

TEST_CASE("metropolis weights on a path use the lazy degree rule") {
    const std::vector<std::pair<int, int>> path = {{0, 1}, {1, 2}};
    const Matrix w = metropolis_weights(3, path, 0.1);
    CHECK(w(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(w(1, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(w(0, 2) == 0.0);
    CHECK(w(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(w(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(stochasticity_gap(w) <= 1e-15);
}

TEST_CASE("row-column repair reaches double stochasticity") {
    Matrix w(2, 2);
    w << 1.0, 1.0, 1.0, 3.0;
    const int sweeps = sinkhorn_repair(w);
    CHECK(sweeps >= 1);
    CHECK(stochasticity_gap(w) <= 1e-12);

    Matrix already(2, 2);
    already << 0.2, 0.8, 0.8, 0.2;
    CHECK(sinkhorn_repair(already) == 0);
    CHECK(already(0, 0) == 0.2);
}
