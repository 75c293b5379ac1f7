#pragma once

#include <cmath>
#include <cstdint>

#include "noisyopt/common.hpp"

namespace noisyopt {

/* 64-bit finalizer (splitmix64). Bijective, good avalanche. */
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/*
 * Counter-based stream generator. A stream is keyed by up to four integers
 * (seed, entity ids, time step); the same key always replays the same draws,
 * and distinct keys give statistically independent streams. This is what makes
 * per-link noise and per-agent gradient perturbations replayable without
 * storing any sampler state.
 */
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t key) : state_(key) {}

    static CounterRng keyed(std::uint64_t seed, std::uint64_t a = 0,
                            std::uint64_t b = 0, std::uint64_t c = 0) {
        std::uint64_t k = mix64(seed ^ 0x243f6a8885a308d3ULL);
        k = mix64(k ^ mix64(a ^ 0x13198a2e03707344ULL));
        k = mix64(k ^ mix64(b ^ 0xa4093822299f31d0ULL));
        k = mix64(k ^ mix64(c ^ 0x082efa98ec4e6c89ULL));
        return CounterRng(k);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /* Uniform on [0, 1) with 53 random bits. */
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /* Uniform on (0, 1]; safe as a log() argument. */
    double next_double_open() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /* Standard normal via Box-Muller; two uniforms per draw, no cached state. */
    double next_normal() {
        const double u1 = next_double_open();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /* Standard normal vector. */
    Vector normal_vector(int dim) {
        Vector v(dim);
        for (int k = 0; k < dim; ++k) v[k] = next_normal();
        return v;
    }

    /* Uniform draw from the solid Euclidean ball of given radius. */
    Vector ball_vector(int dim, double radius) {
        Vector v = normal_vector(dim);
        const double n = v.norm();
        if (n == 0.0) return Vector::Zero(dim);
        const double u = next_double_open();
        return v * (radius * std::pow(u, 1.0 / dim) / n);
    }

    /* Uniform integer in [0, n). */
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  private:
    std::uint64_t state_;
};

}  // namespace noisyopt
