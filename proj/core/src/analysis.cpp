#include "noisyopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace noisyopt {

namespace {

constexpr double kExponentTol = 1e-12;

void check_horizons(const std::vector<long>& horizons) {
    if (horizons.empty()) throw ConfigError("bound curve needs at least one horizon");
    long prev = 0;
    for (long t : horizons) {
        if (t < 1) throw ConfigError("bound curve horizons must be >= 1");
        if (t <= prev && prev != 0)
            throw ConfigError("bound curve horizons must be strictly increasing");
        prev = t;
    }
}

double mixing_tail(const BoundConstants& c) {
    return c.n_agents * c.big_theta / (1.0 - c.gamma);
}

/* (3 G_f + G_eta) / sigma: the dual-averaging sensitivity factor. */
double da_factor(const BoundConstants& c) {
    return (3.0 * c.g_f + c.g_eta) / c.sigma_map;
}

}  // namespace

BoundConstants assemble_constants(const CompositeProblem& problem,
                                  const MirrorMap& map,
                                  const TopologySchedule& topology, double nu,
                                  bool noise_surely_bounded,
                                  bool noise_zero_mean,
                                  const StochasticSubgradientOracle& oracle,
                                  Method method, double init_norm,
                                  double psi_star) {
    if (nu < 0.0) throw ConfigError("nu must be non-negative");
    BoundConstants c;
    c.n_agents = problem.n_agents;
    c.window = topology.window();
    c.theta = topology.theta();
    const MixingConstants mix = topology.mixing();
    c.big_theta = mix.big_theta;
    c.gamma = mix.gamma;
    c.nu = nu;
    const double inflation =
        method == Method::mirror_descent ? std::sqrt(nu) : 0.0;
    c.g_f = oracle.g_bound(problem, inflation);
    if (problem.variant == ProblemVariant::local_reg)
        c.g_chi = problem.reg_bound();
    else
        c.g_eta = problem.reg_bound();
    c.sigma_map = map.strong_convexity();
    c.lips_map = map.grad_lipschitz();
    c.set_diam = problem.set.diameter();
    c.bregman_diam_sq = problem.set.bregman_diameter_sq(map);
    c.init_norm = init_norm;
    c.psi_star = psi_star;
    c.surely_bounded = oracle.bounded && noise_surely_bounded;
    c.noise_zero_mean = noise_zero_mean;

    const double n = c.n_agents;
    const double tail = 2.0 * n * c.big_theta / (1.0 - c.gamma);  // 2N*Theta/(1-gamma)
    const double gsum = (n + 1.0) * c.g_f + n * c.g_chi;
    const double sqrt_nu = std::sqrt(nu);
    c.c1 = tail * gsum * init_norm;
    c.c2 = n * c.bregman_diam_sq;
    c.c3 = ((4.0 * n + n * tail) * gsum + n * c.g_chi) * (c.g_f + c.g_chi) /
               c.sigma_map +
           n * c.g_f * c.g_f / (2.0 * c.sigma_map);
    c.c4 = (4.0 * n + n * tail) * gsum * n * sqrt_nu +
           (c.g_f + c.g_chi) * n * n * sqrt_nu;
    c.c5 = std::sqrt(2.0 / c.sigma_map) * std::sqrt(c.bregman_diam_sq) *
           c.lips_map * n * sqrt_nu;
    c.c6 = n * c.lips_map * nu;
    return c;
}

std::vector<double> md_gap_bound_curve(const BoundConstants& c,
                                       const StepSchedule& steps,
                                       const NoiseDecay& decay,
                                       const std::vector<long>& horizons) {
    check_horizons(horizons);
    std::vector<double> out;
    out.reserve(horizons.size());
    double sum_a = 0.0, sum_r = 0.0, sum_ra = 0.0, sum_r2a = 0.0;
    std::size_t next = 0;
    for (long t = 0; t <= horizons.back(); ++t) {
        const double a = steps.at(t);
        const double r = decay.at(t);
        sum_a += a;
        sum_r += r;
        sum_ra += r / a;
        sum_r2a += r * r / a;
        if (next < horizons.size() && horizons[next] == t) {
            const double T = static_cast<double>(t);
            out.push_back(c.c1 / T + c.c2 / (T * a) + c.c3 * sum_a / T +
                          c.c4 * sum_r / T + c.c5 * sum_ra / T +
                          c.c6 * sum_r2a / T);
            ++next;
        }
    }
    return out;
}

std::vector<double> da_gap_bound_curve(const BoundConstants& c,
                                       const StepSchedule& steps,
                                       const NoiseDecay& decay,
                                       const std::vector<long>& horizons) {
    check_horizons(horizons);
    const double s = da_factor(c);
    const double n = c.n_agents;
    const double sqrt_nu = std::sqrt(c.nu);
    const double lead = s * (mixing_tail(c) + 2.0) * c.g_f + c.g_f * c.g_f;
    std::vector<double> out;
    out.reserve(horizons.size());
    double sum_a = 0.0;        // sum alpha_t, t = 0..T
    double sum_ar2 = 0.0;      // sum alpha_t r_t^2, t = 0..T
    double sum_mix = 0.0;      // sum alpha_t * inner(t), t = 1..T
    double sum_lag = 0.0;      // sum alpha_t r_{t-1}, t = 1..T
    double sum_r = 0.0;        // sum r_t, t = 1..T
    double inner = 0.0;        // sum_{s=1}^{t-1} r_{s-1} gamma^{t-s-1}
    std::size_t next = 0;
    for (long t = 0; t <= horizons.back(); ++t) {
        const double a = steps.at(t);
        const double r = decay.at(t);
        sum_a += a;
        sum_ar2 += a * r * r;
        if (t >= 1) {
            const double r_prev = decay.at(t - 1);
            sum_mix += a * inner;
            sum_lag += a * r_prev;
            sum_r += r;
            inner = c.gamma * inner + r_prev;  // advances inner(t) -> inner(t+1)
        }
        if (next < horizons.size() && horizons[next] == t) {
            const double T = static_cast<double>(t);
            out.push_back(lead * sum_a / T +
                          s * c.big_theta * n * n * sqrt_nu * sum_mix / T +
                          s * 2.0 * n * sqrt_nu * sum_lag / T +
                          c.psi_star / (T * a) + n * c.nu * sum_ar2 / T +
                          sqrt_nu * c.set_diam * sum_r / T);
            ++next;
        }
    }
    return out;
}

double md_gap_bound_hp(const BoundConstants& c, const StepSchedule& steps,
                       const NoiseDecay& decay, long horizon, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw ConfigError("confidence level delta must lie in (0, 1)");
    if (!c.surely_bounded)
        throw ConfigMismatch(
            "high-probability bound needs surely bounded subgradients and link "
            "noise");
    const double base = md_gap_bound_curve(c, steps, decay, {horizon}).front();
    return base + 2.0 * std::sqrt(2.0) * c.g_f * c.set_diam * c.n_agents *
                      std::sqrt(std::log(1.0 / delta)) /
                      std::sqrt(static_cast<double>(horizon));
}

double da_gap_bound_hp(const BoundConstants& c, const StepSchedule& steps,
                       const NoiseDecay& decay, long horizon, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw ConfigError("confidence level delta must lie in (0, 1)");
    if (!c.surely_bounded || !c.noise_zero_mean)
        throw ConfigMismatch(
            "high-probability bound needs surely bounded subgradients and "
            "zero-mean bounded link noise");
    // Expectation-form terms without the deterministic noise-drift term,
    // which the martingale argument replaces.
    const double s = da_factor(c);
    const double n = c.n_agents;
    const double sqrt_nu = std::sqrt(c.nu);
    const double lead = s * (mixing_tail(c) + 2.0) * c.g_f + c.g_f * c.g_f;
    double sum_a = 0.0, sum_ar2 = 0.0, sum_mix = 0.0, sum_lag = 0.0;
    double sum_r2 = 0.0;  // sum r_t^2, t = 1..T
    double inner = 0.0;
    double alpha_T = 1.0;
    for (long t = 0; t <= horizon; ++t) {
        const double a = steps.at(t);
        const double r = decay.at(t);
        sum_a += a;
        sum_ar2 += a * r * r;
        if (t >= 1) {
            const double r_prev = decay.at(t - 1);
            sum_mix += a * inner;
            sum_lag += a * r_prev;
            sum_r2 += r * r;
            inner = c.gamma * inner + r_prev;
        }
        alpha_T = a;
    }
    const double T = static_cast<double>(horizon);
    const double sqrt_T = std::sqrt(T);
    const double dev = std::sqrt(std::log(2.0 / delta));
    return lead * sum_a / T + s * c.big_theta * n * n * sqrt_nu * sum_mix / T +
           s * 2.0 * n * sqrt_nu * sum_lag / T + c.psi_star / (T * alpha_T) +
           n * c.nu * sum_ar2 / T +
           2.0 * std::sqrt(2.0) * c.g_f * c.set_diam * dev / sqrt_T +
           std::sqrt(2.0) * n * sqrt_nu * c.set_diam * std::sqrt(sum_r2) * dev /
               sqrt_T;
}

double md_closed_rate_bound(const BoundConstants& c, double kappa1,
                            double kappa2, long horizon) {
    if (!(kappa1 > 0.0 && kappa1 < kappa2 && kappa2 <= 1.0))
        throw ConfigError("closed-form bound needs 0 < kappa1 < kappa2 <= 1");
    if (horizon < 1) throw ConfigError("closed-form bound needs horizon >= 1");
    const double T = static_cast<double>(horizon);
    if (kappa2 == 1.0) {
        return (c.c1 + (2.0 - kappa1) / (1.0 - kappa1) * c.c6) / T +
               (std::pow(2.0, kappa1) * c.c2 +
                std::pow(2.0, kappa1) * c.c5 / kappa1) /
                   std::pow(T, 1.0 - kappa1) +
               std::pow(2.0, 1.0 - kappa1) / (1.0 - kappa1) * c.c3 /
                   std::pow(T, kappa1) +
               4.0 * c.c4 * std::log(T) / T;
    }
    const double q = 2.0 * kappa2 - kappa1;
    if (std::abs(1.0 - q) < kExponentTol)
        throw ExcludedExponent(
            "exponent pair with 2*kappa2 - kappa1 = 1 is excluded");
    return (c.c1 + std::abs((1.0 - 2.0 * q) / (1.0 - q)) * c.c6) / T +
           std::pow(2.0, kappa1) * c.c2 / std::pow(T, 1.0 - kappa1) +
           std::pow(2.0, 1.0 - kappa1) / (1.0 - kappa1) * c.c3 /
               std::pow(T, kappa1) +
           std::pow(2.0, 1.0 - kappa2) / (1.0 - kappa2) * c.c4 /
               std::pow(T, kappa2) +
           std::pow(2.0, 1.0 - (kappa2 - kappa1)) / (1.0 - (kappa2 - kappa1)) *
               c.c5 / std::pow(T, kappa2 - kappa1) +
           c.c6 / std::abs(1.0 - q) / std::pow(T, q);
}

double da_closed_rate_bound(const BoundConstants& c, double kappa1,
                            double kappa2, long horizon) {
    if (!(kappa1 > 0.0 && kappa1 < 1.0))
        throw ConfigError("closed-form bound needs kappa1 in (0, 1)");
    if (!(kappa2 > 0.0 && kappa2 <= 1.0))
        throw ConfigError("closed-form bound needs kappa2 in (0, 1]");
    if (horizon < 2) throw ConfigError("closed-form bound needs horizon >= 2");
    const double T = static_cast<double>(horizon);
    const double s = da_factor(c);
    const double n = c.n_agents;
    const double sqrt_nu = std::sqrt(c.nu);
    const double pow21 = std::pow(2.0, 1.0 - kappa1) / (1.0 - kappa1);
    if (kappa2 == 1.0) {
        const double lead =
            s * ((mixing_tail(c) + 2.0) * c.g_f +
                 c.big_theta * n * n * sqrt_nu / (1.0 - c.gamma)) +
            c.g_f * c.g_f;
        return lead * pow21 / std::pow(T, kappa1) +
               s * 2.0 * n * sqrt_nu / kappa1 / std::pow(T, kappa1 + 1.0) +
               c.psi_star * std::pow(2.0, kappa1) / std::pow(T, 1.0 - kappa1) +
               n * c.nu / (kappa1 + 1.0) / std::pow(T, kappa1 + 2.0) +
               2.0 * sqrt_nu * c.set_diam * std::log(T) / T +
               (s * 2.0 * n * sqrt_nu * (kappa1 + 1.0) / kappa1 +
                n * c.nu * (kappa1 + 2.0) / (kappa1 + 1.0)) /
                   T;
    }
    if (std::abs(1.0 - (kappa1 + kappa2)) < kExponentTol)
        throw ExcludedExponent("exponent pair with kappa1 + kappa2 = 1 is excluded");
    if (std::abs(1.0 - (kappa1 + 2.0 * kappa2)) < kExponentTol)
        throw ExcludedExponent(
            "exponent pair with kappa1 + 2*kappa2 = 1 is excluded");
    const double km = std::min(kappa1, kappa2);
    const double lead = s * (mixing_tail(c) + 2.0) * c.g_f + c.g_f * c.g_f;
    const double d12 = std::abs(1.0 - (kappa1 + kappa2));
    const double d122 = std::abs(1.0 - (kappa1 + 2.0 * kappa2));
    return lead * pow21 / std::pow(T, kappa1) +
           s * c.big_theta * n * n * sqrt_nu / (1.0 - c.gamma) *
               std::pow(2.0, 1.0 - km) / (1.0 - km) / std::pow(T, km) +
           s * 2.0 * n * sqrt_nu / d12 / std::pow(T, kappa1 + kappa2) +
           c.psi_star * std::pow(2.0, kappa1) / std::pow(T, 1.0 - kappa1) +
           n * c.nu / d122 / std::pow(T, kappa1 + 2.0 * kappa2) +
           sqrt_nu * c.set_diam * std::pow(2.0, 1.0 - kappa2) / (1.0 - kappa2) /
               std::pow(T, kappa2) +
           (s * 2.0 * n * sqrt_nu * (kappa1 + kappa2) / d12 +
            n * c.nu * (kappa1 + 2.0 * kappa2) / d122) /
               T;
}

double md_sqrt_envelope_constant(const BoundConstants& c) {
    const double rt2 = std::sqrt(2.0);
    return std::max({c.c1 + 3.0 * c.c6, 4.0 * c.c4,
                     rt2 * c.c2 + 2.0 * rt2 * c.c3 + 2.0 * rt2 * c.c5});
}

double md_sqrt_envelope_constant_hp(const BoundConstants& c, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw ConfigError("confidence level delta must lie in (0, 1)");
    if (!c.surely_bounded)
        throw ConfigMismatch(
            "high-probability envelope needs surely bounded subgradients and "
            "link noise");
    const double rt2 = std::sqrt(2.0);
    return std::max({c.c1 + 3.0 * c.c6, 4.0 * c.c4,
                     rt2 * c.c2 + 2.0 * rt2 * c.c3 + 2.0 * rt2 * c.c5 +
                         2.0 * rt2 * c.g_f * c.set_diam * c.n_agents *
                             std::sqrt(std::log(1.0 / delta))});
}

namespace {

/* Noise-drift coefficient: 2^(1-k2) sqrt(nu) D / (1-k2), or its k2 = 1 limit
   pairing with ln T / T. */
double drift_coeff(const BoundConstants& c, double kappa2) {
    const double sd = std::sqrt(c.nu) * c.set_diam;
    if (kappa2 == 1.0) return 2.0 * sd;
    return sd * std::pow(2.0, 1.0 - kappa2) / (1.0 - kappa2);
}

}  // namespace

GeneralEnvelope da_general_envelope(const BoundConstants& c, double kappa1,
                                    double kappa2) {
    if (!(kappa1 > 0.0 && kappa1 < 1.0) || !(kappa2 > 0.0 && kappa2 <= 1.0))
        throw ConfigError("envelope needs kappa1 in (0,1), kappa2 in (0,1]");
    if (std::abs(1.0 - (kappa1 + kappa2)) < kExponentTol)
        throw ExcludedExponent("exponent pair with kappa1 + kappa2 = 1 is excluded");
    if (std::abs(1.0 - (kappa1 + 2.0 * kappa2)) < kExponentTol)
        throw ExcludedExponent(
            "exponent pair with kappa1 + 2*kappa2 = 1 is excluded");
    const double s = da_factor(c);
    const double n = c.n_agents;
    const double sqrt_nu = std::sqrt(c.nu);
    const double km = std::min(kappa1, kappa2);
    const double d12 = std::abs(1.0 - (kappa1 + kappa2));
    const double d122 = std::abs(1.0 - (kappa1 + 2.0 * kappa2));
    GeneralEnvelope env;
    env.exponent = std::min({kappa1, kappa2, 1.0 - kappa1, 1.0});
    env.constant = std::max(
        {(s * (mixing_tail(c) + 2.0) * c.g_f + c.g_f * c.g_f) *
             std::pow(2.0, 1.0 - kappa1) / (1.0 - kappa1),
         s * c.big_theta * n * n * sqrt_nu / (1.0 - c.gamma) *
             std::pow(2.0, 1.0 - km) / (1.0 - km),
         s * 2.0 * n * sqrt_nu / d12, c.psi_star * std::pow(2.0, kappa1),
         n * c.nu / d122, drift_coeff(c, kappa2),
         s * 2.0 * n * sqrt_nu * std::abs(kappa1 + kappa2) / d12 +
             n * c.nu * std::abs(kappa1 + 2.0 * kappa2) / d122});
    return env;
}

double da_sqrt_envelope_constant(const BoundConstants& c, double kappa2) {
    if (!(kappa2 > 0.5 && kappa2 <= 1.0))
        throw ConfigError("sqrt envelope needs kappa2 in (1/2, 1]");
    const double s = da_factor(c);
    const double n = c.n_agents;
    const double sqrt_nu = std::sqrt(c.nu);
    const double rt2 = std::sqrt(2.0);
    return std::max(
        {(s * ((mixing_tail(c) + 2.0) * c.g_f +
               c.big_theta * n * n * sqrt_nu / (1.0 - c.gamma)) +
          c.g_f * c.g_f) *
             2.0 * rt2,
         s * 2.0 * n * sqrt_nu / (kappa2 - 0.5), c.psi_star * rt2,
         n * c.nu / (2.0 * kappa2 - 0.5), drift_coeff(c, kappa2),
         s * 2.0 * n * sqrt_nu * (kappa2 + 0.5) / (kappa2 - 0.5) +
             n * c.nu * (2.0 * kappa2 + 0.5) / (2.0 * kappa2 - 0.5)});
}

double da_hp_envelope(const BoundConstants& c, double kappa2, double delta,
                      long horizon) {
    if (!(delta > 0.0 && delta < 1.0))
        throw ConfigError("confidence level delta must lie in (0, 1)");
    if (!(kappa2 > 0.0 && kappa2 <= 1.0))
        throw ConfigError("envelope needs kappa2 in (0, 1]");
    if (horizon < 3) throw ConfigError("envelope needs horizon >= 3");
    if (!c.surely_bounded || !c.noise_zero_mean)
        throw ConfigMismatch(
            "high-probability envelope needs surely bounded subgradients and "
            "zero-mean bounded link noise");
    const double s = da_factor(c);
    const double n = c.n_agents;
    const double sqrt_nu = std::sqrt(c.nu);
    const double rt2 = std::sqrt(2.0);
    const double dev = std::sqrt(std::log(2.0 / delta));
    const double T = static_cast<double>(horizon);
    const double head =
        (s * (mixing_tail(c) + 2.0) * c.g_f + c.g_f * c.g_f) * 2.0 * rt2 +
        c.psi_star * rt2 + 2.0 * rt2 * c.g_f * c.set_diam * dev;
    const double head_merged =
        (s * ((mixing_tail(c) + 2.0) * c.g_f +
              c.big_theta * n * n * sqrt_nu / (1.0 - c.gamma)) +
         c.g_f * c.g_f) *
            2.0 * rt2 +
        c.psi_star * rt2 + 2.0 * rt2 * c.g_f * c.set_diam * dev;
    if (kappa2 < 0.5) {
        if (std::abs(0.5 - 2.0 * kappa2) < kExponentTol)
            throw ExcludedExponent("noise exponent 1/4 is excluded here");
        const double cbar = std::max(
            {head,
             s * c.big_theta * n * n * sqrt_nu / (1.0 - c.gamma) *
                     std::pow(2.0, 1.0 - kappa2) / (1.0 - kappa2) +
                 n * sqrt_nu * c.set_diam * std::pow(2.0, 1.0 - kappa2) * dev,
             s * 2.0 * n * sqrt_nu / (0.5 - kappa2) +
                 n * c.nu / std::abs(0.5 - 2.0 * kappa2)});
        return 3.0 * cbar / std::pow(T, kappa2);
    }
    if (std::abs(kappa2 - 0.5) < kExponentTol) {
        const double cbar =
            std::max({head_merged, 3.0 * n * c.nu, s * 4.0 * n * sqrt_nu,
                      2.0 * n * sqrt_nu * c.set_diam * dev});
        return 4.0 * cbar * std::sqrt(std::log(T)) / std::sqrt(T);
    }
    const double cbar = std::max(
        {head_merged + rt2 * n * sqrt_nu * c.set_diam * dev /
                           std::sqrt(2.0 * kappa2 - 1.0),
         s * 2.0 * n * sqrt_nu * (kappa2 + 0.5) / (kappa2 - 0.5) +
             n * c.nu * (2.0 * kappa2 + 0.5) / (2.0 * kappa2 - 0.5)});
    return 2.0 * cbar / std::sqrt(T);
}

std::vector<double> noise_regime_envelope(const BoundConstants& c,
                                          const StepSchedule& steps,
                                          const NoiseDecay& decay, double delta,
                                          const std::vector<long>& horizons) {
    check_horizons(horizons);
    if (std::abs(steps.kappa1 - 0.5) >= kExponentTol)
        throw ConfigError(
            "regime envelope is defined for the 1/sqrt(t+1) step schedule");
    if (!(decay.kappa2 > 0.0 && decay.kappa2 <= 1.0))
        throw ConfigError("regime envelope needs kappa2 in (0, 1]");
    const double k2 = decay.kappa2;
    if (std::abs(k2 - 0.5) <= kExponentTol && horizons.front() < 2)
        throw ConfigError(
            "regime envelope with kappa2 = 1/2 needs horizons >= 2");
    // Validates delta and the boundedness prerequisites as a side effect.
    const double anchor =
        da_gap_bound_hp(c, steps, decay, horizons.back(), delta);
    const auto shape = [k2](long t) {
        const double T = static_cast<double>(t);
        if (k2 < 0.5 - kExponentTol) return std::pow(T, -k2);
        if (k2 <= 0.5 + kExponentTol)
            return std::sqrt(std::log(T)) / std::sqrt(T);
        return 1.0 / std::sqrt(T);
    };
    const double scale = anchor / shape(horizons.back());
    std::vector<double> out;
    out.reserve(horizons.size());
    for (long t : horizons) out.push_back(scale * shape(t));
    return out;
}

double md_step_bound(const BoundConstants& c, const StepSchedule& steps,
                     long t) {
    if (t < 0) throw ConfigError("step bound needs t >= 0");
    return (c.g_f + c.g_chi) / c.sigma_map * steps.at(t);
}

std::vector<double> md_disagreement_bound_curve(
    const BoundConstants& c, const StepSchedule& steps, const NoiseDecay& decay,
    double ref_init_norm, const std::vector<long>& horizons) {
    check_horizons(horizons);
    const double n = c.n_agents;
    const double tail = 2.0 * n * c.big_theta / (1.0 - c.gamma);
    const double head = tail * ref_init_norm;
    const double coeff = 4.0 * n + n * tail;  // 4N + 2N^2*Theta/(1-gamma)
    const double sqrt_nu = std::sqrt(c.nu);
    std::vector<double> out;
    out.reserve(horizons.size());
    double acc = 0.0;
    std::size_t next = 0;
    for (long t = 0; t <= horizons.back(); ++t) {
        acc += (c.g_f + c.g_chi) / c.sigma_map * steps.at(t) +
               n * sqrt_nu * decay.at(t);
        if (next < horizons.size() && horizons[next] == t) {
            out.push_back(head + coeff * acc);
            ++next;
        }
    }
    return out;
}

std::vector<double> da_dual_deviation_bound_curve(
    const BoundConstants& c, const NoiseDecay& decay,
    const std::vector<long>& ts) {
    check_horizons(ts);
    const double n = c.n_agents;
    const double sqrt_nu = std::sqrt(c.nu);
    const double head = (mixing_tail(c) + 2.0) * c.g_f;
    std::vector<double> out;
    out.reserve(ts.size());
    double middle = 0.0;  // sum_{s=1}^{t-2} r_s gamma^{t-2-s}
    std::size_t next = 0;
    for (long t = 1; t <= ts.back(); ++t) {
        if (next < ts.size() && ts[next] == t) {
            out.push_back(head + c.big_theta * n * n * sqrt_nu * middle +
                          2.0 * n * sqrt_nu * decay.at(t - 1));
            ++next;
        }
        middle = c.gamma * middle + decay.at(t - 1);  // advances t -> t+1
    }
    return out;
}

void TrialEnsemble::validate() const {
    if (traces.empty()) throw ConfigError("ensemble needs at least one trial");
    if (grid.empty()) throw ConfigError("ensemble needs a checkpoint grid");
    for (const auto& tr : traces) {
        if (tr.records.size() != grid.size())
            throw ConfigMismatch("trace checkpoint count differs from the grid");
        for (std::size_t k = 0; k < grid.size(); ++k)
            if (tr.records[k].t != grid[k])
                throw ConfigMismatch("trace checkpoints differ from the grid");
    }
}

std::vector<CurvePoint> expected_error_curve(const TrialEnsemble& ensemble,
                                             int agent) {
    ensemble.validate();
    const int m = ensemble.trials();
    if (agent < 0 ||
        agent >= static_cast<int>(ensemble.traces[0].records[0].avg_value.size()))
        throw ConfigError("agent index out of range");
    std::vector<CurvePoint> out;
    out.reserve(ensemble.grid.size());
    for (std::size_t k = 0; k < ensemble.grid.size(); ++k) {
        double mean = 0.0;
        for (const auto& tr : ensemble.traces)
            mean += tr.records[k].avg_value[agent] - ensemble.f_star;
        mean /= m;
        double var = 0.0;
        if (m > 1) {
            for (const auto& tr : ensemble.traces) {
                const double d =
                    tr.records[k].avg_value[agent] - ensemble.f_star - mean;
                var += d * d;
            }
            var /= (m - 1);
        }
        out.push_back({ensemble.grid[k], mean, m > 1 ? std::sqrt(var / m) : 0.0});
    }
    return out;
}

RateFit fit_rate(const std::vector<CurvePoint>& curve, long t_lo, long t_hi) {
    std::vector<double> xs, ys;
    for (const auto& p : curve) {
        if (p.t < t_lo || p.t > t_hi) continue;
        if (p.mean <= 0.0)
            throw DegenerateFit("non-positive mean error inside the fit window");
        xs.push_back(std::log(static_cast<double>(p.t)));
        ys.push_back(std::log(p.mean));
    }
    const int n = static_cast<int>(xs.size());
    if (n < 4) throw DegenerateFit("fit window holds fewer than 4 checkpoints");
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int k = 0; k < n; ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    if (sxx == 0.0) throw DegenerateFit("fit window has no spread in log t");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    fit.points = n;
    return fit;
}

HighProbReport high_prob_check(
    const TrialEnsemble& ensemble, int agent, double delta,
    const std::function<double(double, long)>& bound_fn) {
    ensemble.validate();
    if (!(delta > 0.0 && delta <= 1.0))
        throw ConfigError("confidence level delta must lie in (0, 1]");
    if (!ensemble.surely_bounded)
        throw ConfigMismatch(
            "high-probability check needs a surely bounded ensemble");
    if (ensemble.trials() < 50)
        throw ConfigError("high-probability check needs at least 50 trials");
    const long T = ensemble.grid.back();
    HighProbReport rep;
    rep.trials = ensemble.trials();
    rep.target = 1.0 - delta;
    rep.bound_value = bound_fn(delta, T);
    for (const auto& tr : ensemble.traces) {
        const double err =
            tr.records.back().avg_value[agent] - ensemble.f_star;
        if (err <= rep.bound_value) ++rep.within;
    }
    rep.fraction = static_cast<double>(rep.within) / rep.trials;
    rep.pass = rep.fraction >= rep.target;
    return rep;
}

DisagreementReport disagreement_report(const TrialEnsemble& ensemble, int agent,
                                       const BoundConstants& c,
                                       const StepSchedule& steps,
                                       const NoiseDecay& decay, Method method) {
    ensemble.validate();
    DisagreementReport rep;
    rep.ts = ensemble.grid;
    const int m = ensemble.trials();
    rep.measured.resize(rep.ts.size(), 0.0);
    for (std::size_t k = 0; k < rep.ts.size(); ++k) {
        double acc = 0.0;
        for (const auto& tr : ensemble.traces) {
            const auto& r = tr.records[k];
            acc += method == Method::mirror_descent ? r.disagreement[agent]
                                                    : r.dual_deviation[agent];
        }
        rep.measured[k] = acc / m;
    }
    if (method == Method::mirror_descent) {
        rep.bound = md_disagreement_bound_curve(
            c, steps, decay, ensemble.traces[0].init_norms[agent], rep.ts);
    } else {
        rep.bound = da_dual_deviation_bound_curve(c, decay, rep.ts);
    }
    for (std::size_t k = 0; k < rep.ts.size(); ++k)
        if (rep.measured[k] > rep.bound[k]) ++rep.violations;
    return rep;
}

AlmostSureReport almost_sure_diagnostics(const RunTrace& trace, int agent,
                                         double f_star) {
    if (trace.records.empty())
        throw ConfigError("diagnostics need a non-empty trace");
    AlmostSureReport rep;
    rep.min_non_increasing = true;
    rep.min_below_average = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : trace.records) {
        const double min_err = r.min_inst_value[agent] - f_star;
        const double avg_err = r.avg_value[agent] - f_star;
        rep.ts.push_back(r.t);
        rep.min_error.push_back(min_err);
        rep.avg_error.push_back(avg_err);
        if (min_err > prev + 1e-15) rep.min_non_increasing = false;
        if (min_err > avg_err + 1e-12) rep.min_below_average = false;
        prev = min_err;
    }
    rep.final_min_error = rep.min_error.back();
    rep.final_avg_error = rep.avg_error.back();
    return rep;
}

}  // namespace noisyopt
