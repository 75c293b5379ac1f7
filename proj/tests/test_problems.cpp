#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "noisyopt/problems.hpp"
#include "noisyopt/rng.hpp"

using namespace noisyopt;

namespace {

Vector vec1(double a) {
    Vector v(1);
    v << a;
    return v;
}

LocalObjective scalar_objective(ObjectiveKind kind, double a, double b) {
    LocalObjective o;
    o.kind = kind;
    if (kind == ObjectiveKind::linear) {
        o.c = vec1(a);
    } else {
        o.A = Matrix(1, 1);
        o.A << a;
        o.b = vec1(b);
    }
    return o;
}

/* F(x) = (x - 1)^2 + (x - 2)^2 over [-5, 5], minimized at 1.5 with value 0.5. */
CompositeProblem two_parabolas() {
    CompositeProblem p;
    p.variant = ProblemVariant::local_reg;
    p.n_agents = 2;
    p.dim = 1;
    const double s2 = std::sqrt(2.0);
    p.objectives = {scalar_objective(ObjectiveKind::quadratic, s2, s2 * 1.0),
                    scalar_objective(ObjectiveKind::quadratic, s2, s2 * 2.0)};
    p.local_regs = {Regularizer::zero(), Regularizer::zero()};
    p.set = ConstraintSet::box(vec1(-5.0), vec1(5.0));
    p.validate();
    return p;
}

}  // namespace

TEST_CASE("absolute-loss subgradients pick the sign of the residual") {
    const LocalObjective o =
        scalar_objective(ObjectiveKind::abs_regression, 1.0, 0.0);
    CHECK(o.value(vec1(2.0)) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(o.subgradient(vec1(2.0))[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(o.subgradient(vec1(0.0))[0] == 0.0);
    CHECK_FALSE(o.smooth());
}

TEST_CASE("quadratic loss differentiates to the residual") {
    const LocalObjective o =
        scalar_objective(ObjectiveKind::quadratic, 1.0, 2.0);
    CHECK(o.value(vec1(0.0)) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(o.subgradient(vec1(0.0))[0] == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(o.smooth());
}

TEST_CASE("hinge loss is active below unit margin and flat above") {
    const LocalObjective o = scalar_objective(ObjectiveKind::hinge, 1.0, 1.0);
    CHECK(o.value(vec1(0.0)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(o.subgradient(vec1(0.0))[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(o.value(vec1(2.0)) == 0.0);
    CHECK(o.subgradient(vec1(2.0))[0] == 0.0);
}

TEST_CASE("linear cost returns its coefficient vector as gradient") {
    LocalObjective o;
    o.kind = ObjectiveKind::linear;
    Vector c(2);
    c << 3.0, -1.0;
    o.c = c;
    Vector x(2);
    x << 1.0, 1.0;
    CHECK(o.value(x) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK((o.subgradient(x) - c).norm() == 0.0);
}

TEST_CASE("objectives are convex along random segments") {
    CounterRng rng = CounterRng::keyed(53);
    Matrix A(3, 2);
    A << 1.0, -0.5, 0.3, 2.0, -1.0, 0.7;
    Vector b(3);
    b << 0.5, -1.0, 1.0;
    Vector labels(3);
    labels << 1.0, -1.0, 1.0;
    LocalObjective objs[3];
    objs[0] = {ObjectiveKind::abs_regression, A, b, Vector()};
    objs[1] = {ObjectiveKind::hinge, A, labels, Vector()};
    objs[2] = {ObjectiveKind::quadratic, A, b, Vector()};
    for (const LocalObjective& o : objs)
        for (int k = 0; k < 50; ++k) {
            const Vector x = rng.normal_vector(2);
            const Vector y = rng.normal_vector(2);
            const double mid = o.value(0.5 * (x + y));
            CHECK(mid <= 0.5 * (o.value(x) + o.value(y)) + 1e-12);
        }
}

TEST_CASE("subgradient norms never exceed the certified bound") {
    CounterRng rng = CounterRng::keyed(59);
    Matrix A(3, 2);
    A << 1.0, -0.5, 0.3, 2.0, -1.0, 0.7;
    Vector b(3);
    b << 0.5, -1.0, 1.0;
    Vector labels(3);
    labels << 1.0, -1.0, 1.0;
    LocalObjective objs[4];
    objs[0] = {ObjectiveKind::abs_regression, A, b, Vector()};
    objs[1] = {ObjectiveKind::hinge, A, labels, Vector()};
    objs[2] = {ObjectiveKind::quadratic, A, b, Vector()};
    objs[3].kind = ObjectiveKind::linear;
    Vector c(2);
    c << 3.0, 4.0;
    objs[3].c = c;
    const double radius = 2.0;
    for (const LocalObjective& o : objs) {
        const double bound = o.grad_bound(radius);
        for (int k = 0; k < 200; ++k) {
            const Vector x = rng.ball_vector(2, radius);
            CHECK(o.subgradient(x).norm() <= bound + 1e-9);
        }
    }
    CHECK(objs[3].grad_bound(0.0) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(objs[2].grad_bound(2.0) >= objs[2].grad_bound(1.0));
}

TEST_CASE("composite values add per-agent or shared regularizers") {
    CompositeProblem p;
    p.n_agents = 2;
    p.dim = 1;
    const double s2 = std::sqrt(2.0);
    p.objectives = {scalar_objective(ObjectiveKind::quadratic, s2, 0.0),
                    scalar_objective(ObjectiveKind::linear, 1.0, 0.0)};
    p.set = ConstraintSet::box(vec1(-5.0), vec1(5.0));

    p.variant = ProblemVariant::local_reg;
    p.local_regs = {Regularizer::l1(1.0), Regularizer::l1(1.0)};
    p.validate();
    // (4 + |2|) + (2 + |2|)
    CHECK(p.value(vec1(2.0)) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(p.local_f(0, vec1(2.0)) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(p.agent_regularizer(1).kind() == RegKind::l1);

    p.variant = ProblemVariant::global_reg;
    p.local_regs.clear();
    p.global_reg = Regularizer::l1(1.0);
    p.validate();
    // (4 + 2)/2 + |2|
    CHECK(p.value(vec1(2.0)) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(p.agent_regularizer(0).kind() == RegKind::l1);
    CHECK(p.reg_bound() > 0.0);
}

TEST_CASE("problem validation rejects inconsistent shapes") {
    CompositeProblem p = two_parabolas();
    p.local_regs.pop_back();
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = two_parabolas();
    p.set = ConstraintSet::box(Vector::Constant(2, -1.0),
                               Vector::Constant(2, 1.0));
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("noiseless oracle returns the exact subgradient") {
    CompositeProblem p = two_parabolas();
    StochasticSubgradientOracle oracle{0.0, true, 5};
    const Vector clean = p.local_subgradient(1, vec1(0.5));
    CHECK((oracle.sample(p, 1, vec1(0.5), 3) - clean).norm() == 0.0);
    CHECK(oracle.g_bound(p, 0.0) == doctest::Approx(p.grad_bound(0.0)).epsilon(1e-14));
}

TEST_CASE("bounded oracle perturbations stay in the sigma ball and average out") {
    CompositeProblem p = two_parabolas();
    StochasticSubgradientOracle oracle{0.3, true, 5};
    const Vector x = vec1(0.5);
    const Vector clean = p.local_subgradient(0, x);
    Vector mean = Vector::Zero(1);
    const int draws = 4000;
    for (int t = 0; t < draws; ++t) {
        const Vector g = oracle.sample(p, 0, x, t);
        CHECK((g - clean).norm() <= 0.3 + 1e-12);
        mean += g;
    }
    mean /= draws;
    CHECK((mean - clean).norm() <= 0.02);
    CHECK(oracle.g_bound(p, 0.0) ==
          doctest::Approx(p.grad_bound(0.0) + 0.3).epsilon(1e-14));
}

TEST_CASE("unbounded oracle widens the second-moment bound by sigma") {
    CompositeProblem p = two_parabolas();
    StochasticSubgradientOracle oracle{0.4, false, 5};
    const double clean = p.grad_bound(0.0);
    CHECK(oracle.g_bound(p, 0.0) ==
          doctest::Approx(std::sqrt(clean * clean + 0.16 * 1.0)).epsilon(1e-14));
}

TEST_CASE("oracle draws replay by key and differ across steps") {
    CompositeProblem p = two_parabolas();
    StochasticSubgradientOracle oracle{0.3, true, 5};
    const Vector x = vec1(0.5);
    CHECK((oracle.sample(p, 0, x, 7) - oracle.sample(p, 0, x, 7)).norm() == 0.0);
    CHECK((oracle.sample(p, 0, x, 7) - oracle.sample(p, 0, x, 8)).norm() > 0.0);
    CHECK((oracle.sample(p, 0, x, 7) - oracle.sample(p, 1, x, 7)).norm() > 0.0);
}

TEST_CASE("reference solver pins the smooth two-parabola optimum") {
    const ReferenceSolution ref = solve_reference(two_parabolas());
    CHECK(ref.x_star[0] == doctest::Approx(1.5).epsilon(1e-4));
    CHECK(ref.f_star == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(ref.restart_spread <= 1e-5);
    CHECK_FALSE(ref.method.empty());
}

TEST_CASE("reference solver handles a nonsmooth composite scalar problem") {
    // |x - 1| + x^2/2 is minimized at x = 1 with value 0.5.
    CompositeProblem p;
    p.variant = ProblemVariant::local_reg;
    p.n_agents = 1;
    p.dim = 1;
    p.objectives = {scalar_objective(ObjectiveKind::abs_regression, 1.0, 1.0)};
    p.local_regs = {Regularizer::half_l2_sq(1.0)};
    p.set = ConstraintSet::box(vec1(-5.0), vec1(5.0));
    p.validate();
    const ReferenceSolution ref = solve_reference(p);
    CHECK(ref.x_star[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(ref.f_star == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("linear objectives on the simplex solve exactly at a vertex") {
    CompositeProblem p;
    p.variant = ProblemVariant::global_reg;
    p.n_agents = 2;
    p.dim = 3;
    LocalObjective o1, o2;
    o1.kind = o2.kind = ObjectiveKind::linear;
    Vector c1(3), c2(3);
    c1 << 1.0, 2.0, 3.0;
    c2 << 0.5, 0.0, 1.0;
    o1.c = c1;
    o2.c = c2;
    p.objectives = {o1, o2};
    p.set = ConstraintSet::simplex(3);
    p.validate();
    const ReferenceSolution ref = solve_reference(p);
    // F(x) = <(c1 + c2)/2, x>; the cheapest average coordinate is index 0.
    CHECK(ref.f_star == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(ref.x_star[0] == doctest::Approx(1.0).epsilon(1e-9));
    // The reference value is optimal against every vertex.
    for (int k = 0; k < 3; ++k) {
        Vector e = Vector::Zero(3);
        e[k] = 1.0;
        CHECK(ref.f_star <= p.value(e) + 1e-12);
    }
}

TEST_CASE("reference value lower-bounds random feasible probes") {
    CompositeProblem p = two_parabolas();
    const ReferenceSolution ref = solve_reference(p);
    CounterRng rng = CounterRng::keyed(61);
    for (int k = 0; k < 200; ++k) {
        const Vector x = p.set.sample(rng);
        CHECK(ref.f_star <= p.value(x) + 1e-9);
    }
}
