#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "noisyopt/noise.hpp"

using namespace noisyopt;

TEST_CASE("polynomial decay schedule hits its closed-form values") {
    CHECK(NoiseDecay{1.0}.at(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(NoiseDecay{1.0}.at(9) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(NoiseDecay{0.5}.at(3) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(NoiseDecay{0.25}.at(15) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("zero distribution emits exact zeros") {
    LinkNoiseSampler sampler(0.0, NoiseDist::zero, true, 42);
    const Vector v = sampler.sample(0, 1, 3, 4);
    CHECK(v.size() == 4);
    CHECK(v.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sampler.bounded());
}

TEST_CASE("every draw stays inside the second-moment ball") {
    for (NoiseDist dist :
         {NoiseDist::uniform_ball, NoiseDist::truncated_gaussian}) {
        LinkNoiseSampler sampler(4.0, dist, true, 7);
        double max_norm = 0.0;
        for (long t = 0; t < 200; ++t)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    if (i == j) continue;
                    max_norm =
                        std::max(max_norm, sampler.sample(i, j, t, 3).norm());
                }
        CHECK(max_norm <= 2.0 + 1e-12);
        CHECK(max_norm > 0.1);  // the stream is not degenerate
    }
}

TEST_CASE("keyed draws replay identically across samplers and calls") {
    LinkNoiseSampler a(2.0, NoiseDist::uniform_ball, true, 11);
    LinkNoiseSampler b(2.0, NoiseDist::uniform_ball, true, 11);
    const Vector first = a.sample(1, 2, 17, 5);
    CHECK((a.sample(1, 2, 17, 5) - first).cwiseAbs().maxCoeff() == 0.0);
    CHECK((b.sample(1, 2, 17, 5) - first).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("distinct links, steps, and seeds give distinct streams") {
    LinkNoiseSampler s(2.0, NoiseDist::uniform_ball, true, 11);
    LinkNoiseSampler other_seed(2.0, NoiseDist::uniform_ball, true, 12);
    const Vector base = s.sample(0, 1, 5, 3);
    CHECK((s.sample(1, 0, 5, 3) - base).norm() > 0.0);
    CHECK((s.sample(0, 1, 6, 3) - base).norm() > 0.0);
    CHECK((other_seed.sample(0, 1, 5, 3) - base).norm() > 0.0);
}

TEST_CASE("empirical second moment respects the stated bound") {
    LinkNoiseSampler sampler(4.0, NoiseDist::uniform_ball, true, 19);
    const int draws = 20000;
    double acc = 0.0;
    for (int t = 0; t < draws; ++t)
        acc += sampler.sample(0, 1, t, 3).squaredNorm();
    const double second_moment = acc / draws;
    CHECK(second_moment <= 1.02 * 4.0);
    // Uniform ball of radius 2 in dimension 3 concentrates near 4 * 3/5.
    CHECK(second_moment == doctest::Approx(2.4).epsilon(0.05));
}

TEST_CASE("centered mode has an empirically negligible mean") {
    LinkNoiseSampler sampler(4.0, NoiseDist::uniform_ball, true, 23);
    Vector mean = Vector::Zero(3);
    const int draws = 20000;
    for (int t = 0; t < draws; ++t) mean += sampler.sample(0, 1, t, 3);
    mean /= draws;
    CHECK(mean.norm() <= 0.05);
}

TEST_CASE("non-centered mode shifts by half the ball radius, staying inside") {
    LinkNoiseSampler sampler(4.0, NoiseDist::uniform_ball, false, 23);
    Vector mean = Vector::Zero(3);
    double max_norm = 0.0;
    const int draws = 20000;
    for (int t = 0; t < draws; ++t) {
        const Vector v = sampler.sample(0, 1, t, 3);
        mean += v;
        max_norm = std::max(max_norm, v.norm());
    }
    mean /= draws;
    CHECK(mean.norm() == doctest::Approx(1.0).epsilon(0.1));  // sqrt(nu)/2
    CHECK(max_norm <= 2.0 + 1e-12);
    CHECK_FALSE(sampler.zero_mean());
}
