#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpcover/common.hpp"
#include "gpcover/rng.hpp"
#include "gpcover/sim.hpp"

namespace gpcover {

struct VarianceDecayResult {
    std::size_t horizon = 0;
    double epsilon = 0.0;
    /// Per t: share of trials whose max grid variance has reached epsilon.
    std::vector<double> fraction;
    /// Per t: mean max grid variance across trials. Trials that stopped
    /// early carry their last recorded value forward.
    std::vector<double> mean_max_variance;
    /// Per trial: first t with max variance <= epsilon, if reached.
    std::vector<std::optional<std::size_t>> hit;
};

/// Runs `trials` independent Phase-I-only explorations and aggregates how
/// fast the max grid variance falls below epsilon. Trial seeds derive from
/// the scenario seed, so the sweep is reproducible from one number.
inline VarianceDecayResult run_variance_decay(const ScenarioConfig& base,
                                              std::size_t trials, double epsilon) {
    if (trials < 1) throw ConfigError("variance decay needs at least one trial");
    base.validate();

    std::size_t horizon = base.max_iters;
    const std::size_t budget = base.max_measurements / base.agent_count;
    if (horizon > budget) {
        horizon = budget;
        detail::log_warning("measurement budget caps the exploration horizon at " +
                            std::to_string(horizon) + " iterations");
    }

    VarianceDecayResult result;
    result.horizon = horizon;
    result.epsilon = epsilon;
    result.fraction.assign(horizon, 0.0);
    result.mean_max_variance.assign(horizon, 0.0);
    result.hit.reserve(trials);

    RunOptions options;
    options.phase1_only = true;
    options.stop_below = epsilon;

    for (std::size_t j = 0; j < trials; ++j) {
        ScenarioConfig cfg = base;
        cfg.seed = derive_seed(base.seed, "trial", j);
        cfg.max_iters = horizon;
        const RunLog log = run_ec(cfg, options);

        const std::size_t len = log.records.size();
        const bool reached = log.records.back().max_variance <= epsilon;
        result.hit.push_back(reached ? std::optional<std::size_t>(len - 1)
                                     : std::nullopt);
        for (std::size_t t = 0; t < horizon; ++t) {
            const double v = log.records[std::min(t, len - 1)].max_variance;
            result.mean_max_variance[t] += v;
            if (reached && t >= len - 1) result.fraction[t] += 1.0;
        }
    }
    for (std::size_t t = 0; t < horizon; ++t) {
        result.fraction[t] /= static_cast<double>(trials);
        result.mean_max_variance[t] /= static_cast<double>(trials);
    }
    return result;
}

struct RkhsRow {
    std::size_t t = 0;
    double gamma = 0.0;
    double sup_error = 0.0;
    double mean_error = 0.0;
};

/// Fits the regularized kernel estimator on the first t archived samples of
/// one Phase-I exploration, with gamma = gamma0 * t^(-alpha), and reports
/// sup and mean absolute error against the true field on the grid.
inline std::vector<RkhsRow> run_rkhs_consistency(const ScenarioConfig& base,
                                                 double alpha,
                                                 std::span<const std::size_t> t_list,
                                                 double gamma0) {
    if (!(alpha > 0.0 && alpha < 0.5)) {
        throw InvalidAlpha("alpha must lie in (0, 1/2)");
    }
    if (!(gamma0 > 0.0)) throw ConfigError("gamma0 must be positive");
    if (t_list.empty()) throw ConfigError("t_list must not be empty");
    base.validate();

    const std::size_t max_t = *std::max_element(t_list.begin(), t_list.end());
    if (max_t > base.max_measurements) {
        throw ConfigError("t_list exceeds the measurement budget");
    }

    std::vector<Point2> locs;
    std::vector<double> values;
    if (max_t > 0) {
        ScenarioConfig cfg = base;
        cfg.max_iters = (max_t + base.agent_count - 1) / base.agent_count;
        RunOptions options;
        options.phase1_only = true;
        const RunLog log = run_ec(cfg, options);
        locs = log.measurement_locations;
        values = log.measurement_values;
    }

    const Grid grid = make_grid(base.domain, base.grid_step);
    const GaussianKernel kernel = base.kernel();

    std::vector<RkhsRow> rows;
    rows.reserve(t_list.size());
    for (std::size_t t : t_list) {
        RkhsRow row;
        row.t = t;
        row.gamma = gamma0 * std::pow(static_cast<double>(t), -alpha);

        Eigen::VectorXd coeffs;
        if (t > 0) {
            const auto m = static_cast<Eigen::Index>(t);
            Eigen::MatrixXd A(m, m);
            for (Eigen::Index i = 0; i < m; ++i) {
                for (Eigen::Index j = 0; j < m; ++j) {
                    A(i, j) = kernel(locs[static_cast<std::size_t>(i)],
                                     locs[static_cast<std::size_t>(j)]);
                }
            }
            A.diagonal().array() += static_cast<double>(t) * row.gamma;
            const Eigen::Map<const Eigen::VectorXd> y(values.data(), m);
            coeffs = Eigen::LLT<Eigen::MatrixXd>(A).solve(y);
        }

        double sup = 0.0;
        double sum = 0.0;
        for (const GridNode& node : grid.nodes) {
            double estimate = 0.0;
            for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
                estimate += coeffs(i) * kernel(locs[static_cast<std::size_t>(i)], node.p);
            }
            const double err = std::abs(estimate - true_field_eval(base.true_field, node.p));
            sup = std::max(sup, err);
            sum += err;
        }
        row.sup_error = sup;
        row.mean_error = sum / static_cast<double>(grid.nodes.size());
        rows.push_back(row);
    }
    return rows;
}

}  // namespace gpcover
