#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gpcover/common.hpp"
#include "gpcover/field.hpp"
#include "gpcover/geometry.hpp"
#include "gpcover/rng.hpp"

namespace gpcover {

inline constexpr double kTwoPi = 6.283185307179586476925287;
inline constexpr std::size_t kThetaBins = 4096;

enum class Phase { One, Two };

struct PhaseIParams {
    double sigma_C_sq = 0.1;       // dispersion around the centroid direction
    double sigma_Delta_sq = 0.1;   // dispersion around the gradient direction
    double rho_scale = 0.05;       // step-length scale, one grid step by default
    double a_exponent = 1.0;       // shape of the a(.) schedule
    double switch_threshold = 0.3; // phase switch level on a(t)

    void validate() const {
        if (!(sigma_C_sq > 0.0)) throw Error("sigma_C_sq must be > 0");
        if (!(sigma_Delta_sq > 0.0)) throw Error("sigma_Delta_sq must be > 0");
        if (!(rho_scale > 0.0)) throw Error("rho_scale must be > 0");
        if (!(a_exponent > 0.0)) throw Error("a_exponent must be > 0");
        if (!(switch_threshold > 0.0 && switch_threshold < 1.0)) {
            throw Error("switch_threshold must lie in (0,1)");
        }
    }
};

struct AgentState {
    Point2 position;
    std::size_t id = 0;
};

/// Exploration weight a(t) = (v_max / lambda)^exponent: continuous, monotone
/// increasing in v_max, 0 at 0 and 1 at lambda. The ratio is clamped against
/// rounding spill outside [0,1].
inline double a_schedule(double v_max, double lambda, double exponent) {
    if (!(lambda > 0.0)) throw Error("a_schedule: lambda must be > 0");
    const double r = std::clamp(v_max / lambda, 0.0, 1.0);
    return std::pow(r, exponent);
}

namespace detail {

/// Mass of exp(-(theta-m)^2/s2) over [0,2pi], in closed form.
inline double truncated_gaussian_mass(double m, double s2) {
    const double s = std::sqrt(s2);
    constexpr double half_sqrt_pi = 0.8862269254527580136491;
    return s * half_sqrt_pi * (std::erf((kTwoPi - m) / s) + std::erf(m / s));
}

/// The bimodal heading distribution of Phase I with its normalizers fixed.
struct ThetaDist {
    double theta_C, theta_Delta, a, sC2, sD2, b, c;

    ThetaDist(double tC, double tD, double a_val, const PhaseIParams& p)
        : theta_C(tC),
          theta_Delta(tD),
          a(a_val),
          sC2(p.sigma_C_sq),
          sD2(p.sigma_Delta_sq),
          b(truncated_gaussian_mass(tC, p.sigma_C_sq)),
          c(truncated_gaussian_mass(tD, p.sigma_Delta_sq)) {}

    double pdf(double theta) const {
        if (theta < 0.0 || theta > kTwoPi) return 0.0;
        double p = 0.0;
        if (a < 1.0) {
            const double dC = theta - theta_C;
            p += (1.0 - a) / b * std::exp(-dC * dC / sC2);
        }
        if (a > 0.0) {
            const double dD = theta - theta_Delta;
            p += a / c * std::exp(-dD * dD / sD2);
        }
        return p;
    }
};

}  // namespace detail

/// Bimodal truncated-Gaussian heading density on [0,2pi], 0 outside.
inline double theta_density(double theta, double theta_C, double theta_Delta, double a,
                            const PhaseIParams& params) {
    return detail::ThetaDist(theta_C, theta_Delta, a, params).pdf(theta);
}

/// Heading draw by inverse CDF on a 4096-bin midpoint discretization of the
/// density; deterministic given the generator state, rejection-free.
inline double sample_theta(double theta_C, double theta_Delta, double a,
                           const PhaseIParams& params, SplitMix64& rng) {
    const detail::ThetaDist dist(theta_C, theta_Delta, a, params);
    constexpr double width = kTwoPi / static_cast<double>(kThetaBins);
    std::array<double, kThetaBins> cum;
    double total = 0.0;
    for (std::size_t k = 0; k < kThetaBins; ++k) {
        total += dist.pdf((static_cast<double>(k) + 0.5) * width) * width;
        cum[k] = total;
    }
    const double target = uniform01(rng) * total;
    const auto it = std::upper_bound(cum.begin(), cum.end(), target);
    const std::size_t k = it == cum.end() ? kThetaBins - 1
                                          : static_cast<std::size_t>(it - cum.begin());
    const double below = k == 0 ? 0.0 : cum[k - 1];
    const double mass = cum[k] - below;
    const double frac = mass > 0.0 ? (target - below) / mass : 0.5;
    return std::clamp((static_cast<double>(k) + frac) * width, 0.0, kTwoPi);
}

/// Half-normal step length |g| * rho_scale, strictly positive.
inline double sample_rho(const PhaseIParams& params, SplitMix64& rng) {
    double rho = 0.0;
    do {
        rho = std::abs(standard_normal(rng)) * params.rho_scale;
    } while (!(rho > 0.0));
    return rho;
}

/// One Phase-I move: heading drawn from the bimodal density aimed at the
/// estimated centroid and the variance-gradient direction, step length
/// half-normal, proposals leaving the domain are rejected (the agent stays).
/// Degenerate aim directions (agent on its centroid, vanishing gradient)
/// fall back to a uniform heading for the step.
template <RadialKernel K>
AgentState phase1_step(const AgentState& agent, const FieldModel<K>& model,
                       Point2 est_centroid, double a, const PhaseIParams& params,
                       const ConvexPolygon& domain, SplitMix64& rng) {
    const Point2 to_centroid = est_centroid - agent.position;
    double theta_C;
    if (norm(to_centroid) <= 1e-9) {
        theta_C = kTwoPi * uniform01(rng);
    } else {
        theta_C = std::atan2(to_centroid.y, to_centroid.x);
        if (theta_C < 0.0) theta_C += kTwoPi;
    }

    const Point2 grad = model.variance_gradient(agent.position);
    double theta_Delta;
    if (norm(grad) < 1e-12) {
        theta_Delta = kTwoPi * uniform01(rng);
    } else {
        theta_Delta = std::atan2(grad.y, grad.x);
        if (theta_Delta < 0.0) theta_Delta += kTwoPi;
    }

    const double theta = sample_theta(theta_C, theta_Delta, a, params, rng);
    const double rho = sample_rho(params, rng);
    const Point2 proposed = agent.position + Point2{rho * std::cos(theta), rho * std::sin(theta)};
    if (domain.contains(proposed)) {
        return {proposed, agent.id};
    }
    return agent;
}

/// One Phase-II move: jump onto the estimated centroid.
inline AgentState phase2_step(const AgentState& agent, Point2 est_centroid) {
    return {est_centroid, agent.id};
}

/// Latching phase selector: Phase II once a(t) drops under the threshold,
/// and forever after.
inline Phase select_phase(double a_value, double threshold, Phase current) {
    if (current == Phase::Two) return Phase::Two;
    return a_value < threshold ? Phase::Two : Phase::One;
}

}  // namespace gpcover
