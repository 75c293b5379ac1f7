#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "noisyopt/methods.hpp"
#include "noisyopt/verify.hpp"

using namespace noisyopt;

namespace {

Vector vec1(double a) {
    Vector v(1);
    v << a;
    return v;
}

LocalObjective scalar_quadratic(double target) {
    LocalObjective o;
    o.kind = ObjectiveKind::quadratic;
    o.A = Matrix(1, 1);
    o.A << 1.0;
    o.b = vec1(target);
    return o;
}

/* Two agents pulling toward 0 and 2 on [-5, 5], no regularizer. */
CompositeProblem tug_of_war() {
    CompositeProblem p;
    p.variant = ProblemVariant::local_reg;
    p.n_agents = 2;
    p.dim = 1;
    p.objectives = {scalar_quadratic(0.0), scalar_quadratic(2.0)};
    p.local_regs = {Regularizer::zero(), Regularizer::zero()};
    p.set = ConstraintSet::box(vec1(-5.0), vec1(5.0));
    p.validate();
    return p;
}

CompositeProblem single_linear(double slope, const Regularizer& reg) {
    CompositeProblem p;
    p.variant = ProblemVariant::global_reg;
    p.n_agents = 1;
    p.dim = 1;
    LocalObjective o;
    o.kind = ObjectiveKind::linear;
    o.c = vec1(slope);
    p.objectives = {o};
    p.global_reg = reg;
    p.set = ConstraintSet::box(vec1(-10.0), vec1(10.0));
    p.validate();
    return p;
}

const LinkNoiseSampler kNoNoise(0.0, NoiseDist::zero, true, 2);
const StochasticSubgradientOracle kExactOracle{0.0, true, 3};

}  // namespace

TEST_CASE("step schedule decays with the configured exponent") {
    CHECK(StepSchedule{0.5}.at(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(StepSchedule{0.5}.at(3) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(StepSchedule{1.0}.at(1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("recording grid brackets the horizon and stays sorted unique") {
    const std::vector<long> trivial = checkpoint_grid(1);
    CHECK(trivial == std::vector<long>{1});
    const std::vector<long> grid = checkpoint_grid(100000);
    CHECK(grid.front() == 1);
    CHECK(grid.back() == 100000);
    CHECK(std::is_sorted(grid.begin(), grid.end()));
    CHECK(std::adjacent_find(grid.begin(), grid.end()) == grid.end());
    CHECK(grid.size() >= 100);
    CHECK(grid.size() <= 202);
    const std::vector<long> coarse = checkpoint_grid(100, 5);
    CHECK(coarse.front() == 1);
    CHECK(coarse.back() == 100);
    CHECK(std::is_sorted(coarse.begin(), coarse.end()));
    CHECK_THROWS_AS(checkpoint_grid(0), ConfigError);
}

TEST_CASE("noiseless two-agent mirror descent matches the hand computation") {
    TopologySchedule topo(2, 1, 0.5, TopologyKind::static_ring, 1);
    const CompositeProblem p = tug_of_war();
    RunConfig cfg;
    cfg.method = Method::mirror_descent;
    cfg.horizon = 2;
    cfg.steps = {0.5};
    cfg.decay = {1.0};
    cfg.checkpoints = {1, 2};
    const RunTrace tr =
        run_trial(p, MirrorMap::euclidean(), topo, kNoNoise, kExactOracle, cfg);

    REQUIRE(tr.records.size() == 2);
    CHECK(tr.init_norms[0] == 0.0);
    CHECK(tr.init_norms[1] == 0.0);

    // Mixed points start at 0; agent 2's unit step lands on its target.
    const CheckpointRecord& r1 = tr.records[0];
    CHECK(r1.t == 1);
    CHECK(r1.iterate[0][0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(r1.iterate[1][0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(r1.step_norm[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(r1.step_norm[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(r1.max_pairwise == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(r1.disagreement[0] == doctest::Approx(2.0).epsilon(1e-14));
    // F(0) = 0 + 2 for both terms of the sum.
    CHECK(r1.min_inst_value[0] == doctest::Approx(2.0).epsilon(1e-12));

    // Second step: both agents mix to 1, then move by 2^(-1/2) apart.
    const CheckpointRecord& r2 = tr.records[1];
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(r2.t == 2);
    CHECK(r2.iterate[0][0] == doctest::Approx(1.0 - h).epsilon(1e-14));
    CHECK(r2.iterate[1][0] == doctest::Approx(1.0 + h).epsilon(1e-14));
    CHECK(r2.step_norm[0] == doctest::Approx(h).epsilon(1e-12));
    CHECK(r2.max_pairwise == doctest::Approx(2.0 * h).epsilon(1e-12));
    CHECK(r2.disagreement[0] == doctest::Approx(2.0 + 2.0 * h).epsilon(1e-12));
    // min over F(0) = 2 and F(1 - h) = 1.5 exactly.
    CHECK(r2.min_inst_value[0] == doctest::Approx(1.5).epsilon(1e-12));
    // Running average of agent 0 is (0 + 1 - h) / 2.
    const double avg0 = (1.0 - h) / 2.0;
    const double expect_f = 0.5 * avg0 * avg0 + 0.5 * (avg0 - 2.0) * (avg0 - 2.0);
    CHECK(r2.avg_value[0] == doctest::Approx(expect_f).epsilon(1e-12));
}

TEST_CASE("single-agent averaged scheme accumulates the scaled gradient sum") {
    TopologySchedule topo(1, 1, 1.0, TopologyKind::static_ring, 1);
    const CompositeProblem p = single_linear(1.0, Regularizer::zero());
    RunConfig cfg;
    cfg.method = Method::dual_averaging;
    cfg.horizon = 3;
    cfg.steps = {0.5};
    cfg.decay = {1.0};
    cfg.checkpoints = {1, 2, 3};
    const RunTrace tr =
        run_trial(p, MirrorMap::euclidean(), topo, kNoNoise, kExactOracle, cfg);
    REQUIRE(tr.records.size() == 3);
    // With unit gradients, the t-th iterate sits at -t / sqrt(t) = -sqrt(t).
    for (int k = 0; k < 3; ++k) {
        const double t = static_cast<double>(k + 1);
        CHECK(tr.records[k].iterate[0][0] ==
              doctest::Approx(-std::sqrt(t)).epsilon(1e-14));
        CHECK(tr.records[k].dual_deviation[0] == 0.0);
    }
    CHECK(tr.records[0].step_norm[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("averaged scheme weights the composite term by the elapsed steps") {
    TopologySchedule topo(1, 1, 1.0, TopologyKind::static_ring, 1);
    const CompositeProblem p = single_linear(1.0, Regularizer::l1(0.6));
    RunConfig cfg;
    cfg.method = Method::dual_averaging;
    cfg.horizon = 2;
    cfg.steps = {0.5};
    cfg.decay = {1.0};
    cfg.checkpoints = {1, 2};
    const RunTrace tr =
        run_trial(p, MirrorMap::euclidean(), topo, kNoNoise, kExactOracle, cfg);
    REQUIRE(tr.records.size() == 2);
    // First update carries weight 0 on the composite term.
    CHECK(tr.records[0].iterate[0][0] == doctest::Approx(-1.0).epsilon(1e-14));
    // Second update shrinks the dual sum 2 by the unit-weighted threshold 0.6.
    CHECK(tr.records[1].iterate[0][0] ==
          doctest::Approx(-1.4 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("identical noiseless agents never disagree") {
    TopologySchedule topo(4, 1, 0.25, TopologyKind::static_ring, 1);
    CompositeProblem p;
    p.variant = ProblemVariant::local_reg;
    p.n_agents = 4;
    p.dim = 1;
    p.objectives.assign(4, scalar_quadratic(1.0));
    p.local_regs.assign(4, Regularizer::zero());
    p.set = ConstraintSet::box(vec1(-5.0), vec1(5.0));
    p.validate();
    RunConfig cfg;
    cfg.method = Method::mirror_descent;
    cfg.horizon = 60;
    const RunTrace tr =
        run_trial(p, MirrorMap::euclidean(), topo, kNoNoise, kExactOracle, cfg);
    for (const CheckpointRecord& r : tr.records) {
        CHECK(r.max_pairwise <= 1e-12);
        for (int i = 0; i < 4; ++i) {
            CHECK(r.disagreement[i] <= 1e-9);
            CHECK(r.inst_value[i] ==
                  doctest::Approx(r.inst_value[0]).epsilon(1e-12));
        }
    }
}

TEST_CASE("noisy runs keep every iterate feasible for both methods") {
    TopologySchedule topo(3, 1, 1.0 / 3.0, TopologyKind::static_ring, 1);
    CompositeProblem p;
    p.variant = ProblemVariant::local_reg;
    p.n_agents = 3;
    p.dim = 2;
    LocalObjective o;
    o.kind = ObjectiveKind::quadratic;
    o.A = Matrix(2, 2);
    o.A << 1.0, 0.2, -0.3, 0.8;
    Vector b(2);
    b << 1.0, -2.0;
    o.b = b;
    p.objectives.assign(3, o);
    p.set = ConstraintSet::ball(Vector::Zero(2), 2.0);
    const LinkNoiseSampler noisy(1.0, NoiseDist::uniform_ball, true, 5);
    const StochasticSubgradientOracle rough{0.5, true, 7};

    for (Method method : {Method::mirror_descent, Method::dual_averaging}) {
        CompositeProblem q = p;
        if (method == Method::mirror_descent) {
            q.variant = ProblemVariant::local_reg;
            q.local_regs.assign(3, Regularizer::l1(0.05));
        } else {
            q.variant = ProblemVariant::global_reg;
            q.global_reg = Regularizer::mixed(0.1, 0.05);
        }
        q.validate();
        RunConfig cfg;
        cfg.method = method;
        cfg.horizon = 300;
        cfg.decay = {0.75};
        const RunTrace tr = run_trial(q, MirrorMap::euclidean(), topo, noisy,
                                      rough, cfg);
        for (const CheckpointRecord& r : tr.records) {
            for (int i = 0; i < 3; ++i) {
                CHECK(q.set.contains(r.iterate[i], 1e-7));
                CHECK(r.step_norm[i] >= 0.0);
                CHECK(std::isfinite(r.avg_value[i]));
            }
            if (method == Method::dual_averaging) {
                REQUIRE(r.dual_deviation.size() == 3);
                for (double d : r.dual_deviation) CHECK(std::isfinite(d));
            }
        }
    }
}

TEST_CASE("identical inputs replay identical trajectories") {
    TopologySchedule topo(3, 2, 0.2, TopologyKind::random_b_connected, 13);
    CompositeProblem p;
    p.variant = ProblemVariant::local_reg;
    p.n_agents = 3;
    p.dim = 2;
    LocalObjective o;
    o.kind = ObjectiveKind::abs_regression;
    o.A = Matrix(2, 2);
    o.A << 1.0, 0.0, 0.5, 1.0;
    Vector b(2);
    b << 0.3, -0.7;
    o.b = b;
    p.objectives.assign(3, o);
    p.local_regs.assign(3, Regularizer::zero());
    p.set = ConstraintSet::box(Vector::Constant(2, -1.0),
                               Vector::Constant(2, 1.0));
    p.validate();
    const LinkNoiseSampler noisy(0.5, NoiseDist::uniform_ball, true, 5);
    const StochasticSubgradientOracle rough{0.4, true, 7};
    RunConfig cfg;
    cfg.method = Method::mirror_descent;
    cfg.horizon = 120;
    const RunTrace a = run_trial(p, MirrorMap::euclidean(), topo, noisy, rough, cfg);
    const RunTrace b2 = run_trial(p, MirrorMap::euclidean(), topo, noisy, rough, cfg);
    REQUIRE(a.records.size() == b2.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        for (int i = 0; i < 3; ++i) {
            CHECK((a.records[k].iterate[i] - b2.records[k].iterate[i]).norm() ==
                  0.0);
            CHECK(a.records[k].avg_value[i] == b2.records[k].avg_value[i]);
        }
        CHECK(a.records[k].max_pairwise == b2.records[k].max_pairwise);
    }
}

TEST_CASE("run rejects bad horizons, mismatched networks, and bad starts") {
    TopologySchedule topo2(2, 1, 0.5, TopologyKind::static_ring, 1);
    TopologySchedule topo3(3, 1, 0.3, TopologyKind::static_ring, 1);
    const CompositeProblem p = tug_of_war();
    RunConfig cfg;
    cfg.horizon = 0;
    CHECK_THROWS_AS(
        run_trial(p, MirrorMap::euclidean(), topo2, kNoNoise, kExactOracle, cfg),
        ConfigError);
    cfg.horizon = 5;
    CHECK_THROWS_AS(
        run_trial(p, MirrorMap::euclidean(), topo3, kNoNoise, kExactOracle, cfg),
        ConfigMismatch);
    cfg.init_override = Vector::Zero(2);
    CHECK_THROWS_AS(
        run_trial(p, MirrorMap::euclidean(), topo2, kNoNoise, kExactOracle, cfg),
        ConfigError);
    cfg.init_override = vec1(7.0);  // outside the box
    CHECK_THROWS_AS(
        run_trial(p, MirrorMap::euclidean(), topo2, kNoNoise, kExactOracle, cfg),
        ConfigError);
}

TEST_CASE("explicit starting point is honored") {
    TopologySchedule topo(2, 1, 0.5, TopologyKind::static_ring, 1);
    const CompositeProblem p = tug_of_war();
    RunConfig cfg;
    cfg.horizon = 1;
    cfg.checkpoints = {1};
    cfg.init_override = vec1(1.5);
    const RunTrace tr =
        run_trial(p, MirrorMap::euclidean(), topo, kNoNoise, kExactOracle, cfg);
    CHECK(tr.init_norms[0] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(tr.init_norms[1] == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("distributed consensus run shadows its centralized twin") {
    // Same seeds, same problem: a single centralized descent on the summed
    // subgradient should track the distributed noiseless benchmark closely by
    // the end of the run.
    ExperimentConfig cfg = simplex_benchmark_config();
    ExperimentSetup s = build_setup(cfg);
    const ReferenceSolution ref = solve_reference(s.problem);
    const RunConfig rc = s.run_config();
    const RunTrace tr = run_trial(s.problem, s.map, s.topology,
                                  s.noise_for_trial(0), s.oracle_for_trial(0),
                                  rc);

    Vector x = s.problem.set.center();
    Vector sum = Vector::Zero(s.problem.dim);
    std::size_t k = 0;
    double final_diff = 0.0;
    for (long t = 0; t < cfg.horizon_t; ++t) {
        Vector g = Vector::Zero(s.problem.dim);
        for (int i = 0; i < s.problem.n_agents; ++i)
            g += s.problem.local_subgradient(i, x);
        x = mirror_step(s.map, s.problem.set, Regularizer::zero(), g, x,
                        s.steps.at(t));
        sum += x;
        if (k < tr.records.size() && tr.records[k].t == t + 1) {
            const double err_twin =
                s.problem.value(sum / static_cast<double>(t + 1)) - ref.f_star;
            const double err_dist = tr.records[k].avg_value[0] - ref.f_star;
            final_diff = std::abs(err_twin - err_dist);
            ++k;
        }
    }
    CHECK(k == tr.records.size());
    CHECK(ref.f_star == doctest::Approx(-8.9784673591793105).epsilon(1e-9));
    CHECK(final_diff <= 1e-3);
}
