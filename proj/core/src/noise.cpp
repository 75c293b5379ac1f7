#include "noisyopt/noise.hpp"

#include <cmath>

namespace noisyopt {

LinkNoiseSampler::LinkNoiseSampler(double nu, NoiseDist dist, bool zero_mean,
                                   std::uint64_t seed)
    : nu_(nu), dist_(dist), zero_mean_(zero_mean), seed_(seed) {
    if (nu_ < 0.0) throw ConfigError("noise_nu must be >= 0");
    if (dist_ == NoiseDist::zero && nu_ != 0.0)
        throw ConfigMismatch("noise_dist 'zero' requires noise_nu = 0");
    if (dist_ != NoiseDist::zero && nu_ == 0.0)
        throw ConfigMismatch("noise_nu = 0 requires noise_dist 'zero'");
}

Vector LinkNoiseSampler::centered_draw(CounterRng& rng, int dim, double radius) const {
    switch (dist_) {
        case NoiseDist::uniform_ball:
            return rng.ball_vector(dim, radius);
        case NoiseDist::truncated_gaussian: {
            // Std-normal scaled so a typical draw fits the ball; resample while
            // outside, then project as a last resort.
            const double sigma = radius / (2.0 * std::sqrt(static_cast<double>(dim)));
            for (int attempt = 0; attempt < 100; ++attempt) {
                Vector v = rng.normal_vector(dim) * sigma;
                if (v.norm() <= radius) return v;
            }
            Vector v = rng.normal_vector(dim) * sigma;
            const double n = v.norm();
            return n > radius ? Vector(v * (radius / n)) : v;
        }
        case NoiseDist::zero:
            return Vector::Zero(dim);
    }
    throw Error("unreachable noise dist");
}

Vector LinkNoiseSampler::sample(int i, int j, long t, int dim) const {
    if (dist_ == NoiseDist::zero || nu_ == 0.0) return Vector::Zero(dim);
    CounterRng rng = CounterRng::keyed(seed_, static_cast<std::uint64_t>(i) + 1,
                                      static_cast<std::uint64_t>(j) + 1,
                                      static_cast<std::uint64_t>(t));
    const double radius = std::sqrt(nu_);
    if (zero_mean_) return centered_draw(rng, dim, radius);
    Vector v = centered_draw(rng, dim, radius / 2.0);
    v[0] += radius / 2.0;
    return v;
}

}  // namespace noisyopt
