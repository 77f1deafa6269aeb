#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gpcover/common.hpp"
#include "gpcover/coverage.hpp"
#include "gpcover/dynamics.hpp"
#include "gpcover/field.hpp"
#include "gpcover/geometry.hpp"
#include "gpcover/grid.hpp"
#include "gpcover/kernel.hpp"
#include "gpcover/rng.hpp"

namespace gpcover {

/// One isotropic Gaussian component of the synthetic sensory field.
struct Bump {
    double weight = 1.0;
    Point2 center{0.5, 0.5};
    double width_sq = 0.04;
};

/// Ground-truth sensory field: a weighted sum of Gaussian bumps.
struct TrueField {
    std::vector<Bump> bumps;
};

inline double true_field_eval(const TrueField& field, Point2 x) {
    double s = 0.0;
    for (const Bump& b : field.bumps) {
        s += b.weight * std::exp(-squared_norm(x - b.center) / b.width_sq);
    }
    return s;
}

/// Full description of one estimation-and-coverage run.
struct ScenarioConfig {
    ConvexPolygon domain = ConvexPolygon::rectangle({0.0, 0.0}, {1.0, 1.0});
    std::size_t agent_count = 8;
    double lengthscale_sq = 0.02;
    double amplitude = 1.0;
    double noise_var = 0.1;
    double grid_step = 0.05;
    PhaseIParams phase1;
    TrueField true_field;
    std::size_t max_iters = 2000;
    std::uint64_t seed = 1;
    std::size_t max_measurements = kDefaultMaxMeasurements;
    /// Optional explicit starts; empty means drawn uniformly from the seed.
    std::vector<Point2> init_positions;

    GaussianKernel kernel() const { return GaussianKernel(lengthscale_sq, amplitude); }

    void validate() const {
        if (agent_count < 1) throw ConfigError("agent_count must be >= 1");
        if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
            throw ConfigError("grid_step must be a positive real");
        }
        if (!(noise_var > 0.0) || !std::isfinite(noise_var)) {
            throw ConfigError("noise_var must be a positive real");
        }
        if (!(lengthscale_sq > 0.0) || !std::isfinite(lengthscale_sq)) {
            throw ConfigError("lengthscale_sq must be a positive real");
        }
        if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
            throw ConfigError("amplitude must be a positive real");
        }
        try {
            phase1.validate();
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
        if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
        if (max_measurements < agent_count) {
            throw ConfigError("max_measurements must allow at least one iteration");
        }
        if (true_field.bumps.empty()) throw ConfigError("true_field needs at least one bump");
        for (const Bump& b : true_field.bumps) {
            if (!std::isfinite(b.weight)) throw ConfigError("bump weight must be finite");
            if (!is_finite(b.center)) throw ConfigError("bump center must be finite");
            if (!(b.width_sq > 0.0)) throw ConfigError("bump width_sq must be > 0");
        }
        if (!init_positions.empty()) {
            if (init_positions.size() != agent_count) {
                throw ConfigError("init_positions must list one point per agent");
            }
            for (const Point2& p : init_positions) {
                if (!domain.contains(p)) {
                    throw ConfigError("init_positions must lie inside the domain");
                }
            }
            for (std::size_t i = 0; i < init_positions.size(); ++i) {
                for (std::size_t j = i + 1; j < init_positions.size(); ++j) {
                    if (distance(init_positions[i], init_positions[j]) <= kGeneratorTol) {
                        throw ConfigError("init_positions must be pairwise distinct");
                    }
                }
            }
        }
    }
};

/// State logged after each completed iteration.
struct IterationRecord {
    std::size_t iteration = 0;
    std::vector<Point2> positions;
    double a_value = 0.0;
    double max_variance = 0.0;
    double mean_variance = 0.0;
    double min_variance = 0.0;
    Phase phase = Phase::One;
    double h_est = 0.0;   // coverage cost under the density steering this iteration
    double h_true = 0.0;  // coverage cost under the true-field density
};

/// Grid dump of the posterior at one snapshot iteration.
struct FieldSnapshot {
    std::size_t iteration = 0;
    std::vector<double> mu_hat;
    std::vector<double> variance;
};

struct RunLog {
    Grid grid;
    std::vector<IterationRecord> records;
    bool switched = false;
    std::size_t switch_iteration = 0;  // meaningful only when switched
    bool terminated_by_displacement = false;
    std::vector<Point2> final_positions;
    std::vector<Point2> est_centroids;
    std::vector<Point2> true_centroids;
    std::vector<FieldSnapshot> snapshots;
    std::vector<Point2> measurement_locations;  // iteration-major, agent-minor
    std::vector<double> measurement_values;
};

/// Loop variations used by experiments and serialization; the plain run
/// needs none of them.
struct RunOptions {
    bool phase1_only = false;
    std::vector<std::size_t> snapshot_iterations;
    /// Stop once the max grid variance reaches this level (exploration studies).
    std::optional<double> stop_below;
};

namespace detail {

inline DensityField uniform_density(const ConvexPolygon& domain, double grid_step) {
    return DensityField::from_function(domain, grid_step, [](Point2) { return 1.0; });
}

/// True-field density on the evaluation grid. A field that vanishes on every
/// node degrades to the uniform density, the zero-mass limit of the centroid
/// map, so degenerate test scenarios still run.
inline DensityField true_density(const ScenarioConfig& config) {
    const Grid g = make_grid(config.domain, config.grid_step);
    std::vector<double> values;
    values.reserve(g.nodes.size());
    bool any_positive = false;
    for (const GridNode& n : g.nodes) {
        const double v = true_field_eval(config.true_field, n.p);
        if (!(v >= 0.0)) throw ConfigError("true field is negative on the grid");
        if (v > 0.0) any_positive = true;
        values.push_back(v);
    }
    if (!any_positive) {
        log_warning("true field vanishes on the whole grid; using uniform density");
        return uniform_density(config.domain, config.grid_step);
    }
    return DensityField(config.domain, config.grid_step, std::move(values));
}

/// Clamped posterior-mean density. Warnings fire once per run, not per
/// iteration: the flags are owned by the caller.
inline DensityField estimate_density(const ConvexPolygon& domain, double grid_step,
                                     std::vector<double> raw, bool& clamp_warned,
                                     bool& zero_warned) {
    std::size_t clamped = 0;
    bool any_positive = false;
    for (double& v : raw) {
        if (v < 0.0) {
            v = 0.0;
            ++clamped;
        } else if (v > 0.0) {
            any_positive = true;
        }
    }
    if (clamped > 0 && !clamp_warned) {
        clamp_warned = true;
        log_warning("density estimate clamped at 0 on " + std::to_string(clamped) +
                    " grid nodes");
    }
    if (!any_positive) {
        if (!zero_warned) {
            zero_warned = true;
            log_warning("posterior mean is nonpositive on the whole grid; using uniform density");
        }
        return uniform_density(domain, grid_step);
    }
    return DensityField(domain, grid_step, std::move(raw));
}

}  // namespace detail

/// Starting positions: the configured ones, or per-agent uniform draws from
/// the domain (rejection sampling over the bounding box).
inline std::vector<Point2> initial_positions(const ScenarioConfig& config) {
    config.validate();
    if (!config.init_positions.empty()) return config.init_positions;
    const auto [lo, hi] = config.domain.bounding_box();
    std::vector<Point2> out;
    out.reserve(config.agent_count);
    for (std::size_t i = 0; i < config.agent_count; ++i) {
        SplitMix64 rng(derive_seed(config.seed, "init", i));
        Point2 p{};
        do {
            p = {lo.x + (hi.x - lo.x) * uniform01(rng),
                 lo.y + (hi.y - lo.y) * uniform01(rng)};
        } while (!config.domain.contains(p));
        out.push_back(p);
    }
    return out;
}

/// Runs the estimation-and-coverage loop: each iteration measures the true
/// field at every agent (with fresh seeded noise), folds the batch into the
/// posterior, evaluates a(t) from the max grid variance, selects the phase
/// (latching; the steering density freezes at the switch), then moves every
/// agent by the Phase I sampler or the Phase II centroid jump. Stops at
/// max_iters or once a Phase II sweep displaces every agent by less than
/// grid_step*1e-2.
inline RunLog run_ec(const ScenarioConfig& config, const RunOptions& options) {
    config.validate();
    const GaussianKernel kern = config.kernel();
    const DensityField truth = detail::true_density(config);

    RunLog log;
    log.grid = make_grid(config.domain, config.grid_step);

    FieldModel<GaussianKernel> model(kern, config.noise_var, config.max_measurements);
    GridPosterior<GaussianKernel> tracker(model, log.grid.nodes);

    std::vector<Point2> positions = initial_positions(config);
    const std::size_t n = positions.size();
    const std::size_t node_count = tracker.node_count();
    const double noise_sd = std::sqrt(config.noise_var);

    Phase phase = Phase::One;
    std::optional<DensityField> frozen;
    std::optional<DensityField> estimate;
    bool clamp_warned = false;
    bool zero_warned = false;
    std::vector<double> values(n);

    for (std::size_t k = 0; k < config.max_iters; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            SplitMix64 rng(derive_seed(config.seed, "noise", i, k));
            values[i] = true_field_eval(config.true_field, positions[i]) +
                        noise_sd * standard_normal(rng);
        }
        model.add_measurements(positions, values);
        tracker.sync(model);

        const auto [v_max, v_arg] = tracker.max_variance();
        double v_sum = 0.0;
        double v_min = tracker.variance(0);
        for (std::size_t j = 0; j < node_count; ++j) {
            const double v = tracker.variance(j);
            v_sum += v;
            v_min = std::min(v_min, v);
        }
        const double a = a_schedule(v_max, kern.amplitude(), config.phase1.a_exponent);

        if (!options.phase1_only) {
            const Phase next = select_phase(a, config.phase1.switch_threshold, phase);
            if (next == Phase::Two && phase == Phase::One) {
                log.switched = true;
                log.switch_iteration = k;
                std::vector<double> raw(node_count);
                for (std::size_t j = 0; j < node_count; ++j) raw[j] = tracker.mean(j);
                frozen = detail::estimate_density(config.domain, config.grid_step,
                                                  std::move(raw), clamp_warned, zero_warned);
            }
            phase = next;
        }

        if (std::find(options.snapshot_iterations.begin(), options.snapshot_iterations.end(),
                      k) != options.snapshot_iterations.end()) {
            FieldSnapshot snap;
            snap.iteration = k;
            snap.mu_hat.resize(node_count);
            snap.variance.resize(node_count);
            for (std::size_t j = 0; j < node_count; ++j) {
                snap.mu_hat[j] = tracker.mean(j);
                snap.variance[j] = tracker.variance(j);
            }
            log.snapshots.push_back(std::move(snap));
        }

        const DensityField* density = nullptr;
        if (phase == Phase::Two) {
            density = &*frozen;
        } else {
            std::vector<double> raw(node_count);
            for (std::size_t j = 0; j < node_count; ++j) raw[j] = tracker.mean(j);
            estimate = detail::estimate_density(config.domain, config.grid_step,
                                                std::move(raw), clamp_warned, zero_warned);
            density = &*estimate;
        }

        std::vector<Point2> centroids = detail::assignment_centroids(
            positions, *density, detail::ZeroMassPolicy::UniformFallback);

        double displacement = 0.0;
        if (phase == Phase::One) {
            for (std::size_t i = 0; i < n; ++i) {
                SplitMix64 rng(derive_seed(config.seed, "phase1", i, k));
                positions[i] = phase1_step({positions[i], i}, model, centroids[i], a,
                                           config.phase1, config.domain, rng)
                                   .position;
            }
        } else {
            detail::separate_collisions(centroids, positions, config.grid_step * 1e-3);
            for (std::size_t i = 0; i < n; ++i) {
                displacement = std::max(displacement, distance(positions[i], centroids[i]));
                positions[i] = phase2_step({positions[i], i}, centroids[i]).position;
            }
        }

        IterationRecord rec;
        rec.iteration = k;
        rec.positions = positions;
        rec.a_value = a;
        rec.max_variance = v_max;
        rec.mean_variance = v_sum / static_cast<double>(node_count);
        rec.min_variance = v_min;
        rec.phase = phase;
        rec.h_est = coverage_value(positions, *density, config.domain);
        rec.h_true = coverage_value(positions, truth, config.domain);
        log.records.push_back(std::move(rec));

        if (phase == Phase::Two && displacement < config.grid_step * 1e-2) {
            log.terminated_by_displacement = true;
            break;
        }
        if (options.stop_below && v_max <= *options.stop_below) break;
    }

    log.final_positions = positions;
    const DensityField& final_density = frozen ? *frozen : *estimate;
    log.est_centroids = detail::assignment_centroids(positions, final_density,
                                                     detail::ZeroMassPolicy::UniformFallback);
    log.true_centroids = detail::assignment_centroids(positions, truth,
                                                      detail::ZeroMassPolicy::UniformFallback);
    log.measurement_locations = model.locations();
    log.measurement_values = model.values();
    return log;
}

inline RunLog run_ec(const ScenarioConfig& config) { return run_ec(config, RunOptions{}); }

struct IdealResult {
    std::vector<Point2> positions;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Lloyd iteration on the true-field density from the given start (normally
/// the final EC positions), stopped when the largest displacement falls
/// under grid_step*1e-2, capped at 500 sweeps. A capped run reports the last
/// iterate with converged = false rather than failing.
inline IdealResult ideal_configuration(const ScenarioConfig& config,
                                       std::span<const Point2> start) {
    config.validate();
    if (start.empty()) throw ConfigError("ideal_configuration needs start positions");
    const DensityField truth = detail::true_density(config);

    IdealResult result;
    result.positions.assign(start.begin(), start.end());
    constexpr std::size_t kLloydCap = 500;
    for (std::size_t it = 0; it < kLloydCap; ++it) {
        voronoi_partition(result.positions, config.domain);
        std::vector<Point2> next = detail::assignment_centroids(
            result.positions, truth, detail::ZeroMassPolicy::UniformFallback);
        detail::separate_collisions(next, result.positions, config.grid_step * 1e-3);
        double displacement = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) {
            displacement = std::max(displacement, distance(result.positions[i], next[i]));
        }
        result.positions = std::move(next);
        ++result.iterations;
        if (displacement < config.grid_step * 1e-2) {
            result.converged = true;
            break;
        }
    }
    return result;
}

}  // namespace gpcover
