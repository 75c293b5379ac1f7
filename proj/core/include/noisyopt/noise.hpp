#pragma once

#include <cstdint>

#include "noisyopt/common.hpp"
#include "noisyopt/rng.hpp"

namespace noisyopt {

enum class NoiseDist { uniform_ball, truncated_gaussian, zero };

/* Polynomially decaying link-noise scale r_t = 1 / (t+1)^kappa2, kappa2 in (0, 1]. */
struct NoiseDecay {
    double kappa2;
    double at(long t) const { return std::pow(t + 1.0, -kappa2); }
};

/*
 * Channel noise generator. Every draw lies in the closed ball of radius
 * sqrt(nu), so the second moment E||xi||^2 <= nu holds by construction. Draws
 * are keyed by (link, step): sample(i, j, t) replays identically and is
 * independent across links and steps.
 *
 * zero_mean controls whether the distribution is centered. Non-centered mode
 * shifts a half-radius draw by a fixed offset of norm sqrt(nu)/2, staying
 * inside the same ball.
 */
class LinkNoiseSampler {
  public:
    LinkNoiseSampler(double nu, NoiseDist dist, bool zero_mean, std::uint64_t seed);

    double nu() const { return nu_; }
    NoiseDist dist() const { return dist_; }
    bool zero_mean() const { return zero_mean_; }

    /* Noise on link j -> i at step t. */
    Vector sample(int i, int j, long t, int dim) const;

    /* True when every draw is surely bounded (all shipped distributions are). */
    bool bounded() const { return true; }

  private:
    Vector centered_draw(CounterRng& rng, int dim, double radius) const;

    double nu_;
    NoiseDist dist_;
    bool zero_mean_;
    std::uint64_t seed_;
};

}  // namespace noisyopt
