#include <benchmark/benchmark.h>

#include "noisyopt/config.hpp"
#include "noisyopt/prox.hpp"
#include "noisyopt/rng.hpp"
#include "noisyopt/verify.hpp"

namespace {

using namespace noisyopt;

void bench_mirror_step_box_l1(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    MirrorMap map = MirrorMap::euclidean();
    ConstraintSet set =
        ConstraintSet::box(Vector::Constant(dim, -1.0), Vector::Constant(dim, 1.0));
    Regularizer reg = Regularizer::l1(0.05);
    CounterRng rng = CounterRng::keyed(1, 2, 3, 4);
    Vector g = rng.normal_vector(dim);
    Vector y = 0.5 * rng.normal_vector(dim);
    for (auto _ : state) {
        Vector x = mirror_step(map, set, reg, g, y, 0.1);
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(bench_mirror_step_box_l1)->Arg(5)->Arg(50);

void bench_entropic_projection(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    MirrorMap map = MirrorMap::negative_entropy();
    ConstraintSet set = ConstraintSet::simplex(dim);
    Regularizer reg = Regularizer::zero();
    CounterRng rng = CounterRng::keyed(5, 6, 7, 8);
    Vector g = rng.normal_vector(dim);
    Vector y = set.center();
    for (auto _ : state) {
        Vector x = mirror_step(map, set, reg, g, y, 0.1);
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(bench_entropic_projection)->Arg(8)->Arg(64);

void bench_composite_prox_ball(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    ConstraintSet set = ConstraintSet::ball(Vector::Zero(dim), 1.5);
    CounterRng rng = CounterRng::keyed(9, 10, 11, 12);
    Vector c = rng.normal_vector(dim);
    for (auto _ : state) {
        Vector x = composite_prox(set, c, 2.0, 0.1, 0.0, 0.0);
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(bench_composite_prox_ball)->Arg(5)->Arg(50);

void bench_weight_matrix(benchmark::State& state) {
    TopologySchedule sched(static_cast<int>(state.range(0)), 3, 0.01,
                           TopologyKind::random_b_connected, 99);
    long t = 0;
    for (auto _ : state) {
        Matrix w = sched.weight_matrix(t++);
        benchmark::DoNotOptimize(w);
    }
}
BENCHMARK(bench_weight_matrix)->Arg(8)->Arg(32);

void bench_trial_steps(benchmark::State& state) {
    ExperimentConfig cfg = md_benchmark_config();
    cfg.horizon_t = static_cast<long>(state.range(0));
    cfg.trials_m = 1;
    validate_config(cfg);
    ExperimentSetup setup = build_setup(cfg);
    RunConfig rc = setup.run_config();
    LinkNoiseSampler noise = setup.noise_for_trial(0);
    StochasticSubgradientOracle oracle = setup.oracle_for_trial(0);
    for (auto _ : state) {
        RunTrace trace = run_trial(setup.problem, setup.map, setup.topology,
                                   noise, oracle, rc);
        benchmark::DoNotOptimize(trace);
    }
    state.SetItemsProcessed(state.iterations() * cfg.horizon_t *
                            cfg.n_agents);
}
BENCHMARK(bench_trial_steps)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
