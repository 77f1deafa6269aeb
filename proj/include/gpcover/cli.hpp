#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "gpcover/config.hpp"
#include "gpcover/csv.hpp"
#include "gpcover/experiments.hpp"
#include "gpcover/sim.hpp"

namespace gpcover {

namespace detail {

inline std::string out_path(const CliConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

inline csv::Writer open_csv(const CliConfig& cfg, const std::string& name) {
    csv::Writer w(out_path(cfg, name));
    w.comment(csv::hash_tag(cfg.config_hash, cfg.scenario.seed));
    return w;
}

inline std::string joined_positions(std::span<const Point2> positions) {
    std::string s;
    for (const Point2& p : positions) {
        s += "," + csv::cell(p.x) + "," + csv::cell(p.y);
    }
    return s;
}

}  // namespace detail

/// Runs the full estimation-and-coverage loop and writes the four run
/// files. Always exits 0 on completion; failures surface as exceptions.
inline int cmd_simulate(const CliConfig& cfg, std::ostream& out) {
    RunOptions options;
    options.snapshot_iterations = cfg.snapshots;
    const RunLog log = run_ec(cfg.scenario, options);

    {
        csv::Writer w = detail::open_csv(cfg, "trajectory.csv");
        w.row("iteration", "agent", "x", "y", "phase");
        for (const IterationRecord& rec : log.records) {
            for (std::size_t i = 0; i < rec.positions.size(); ++i) {
                w.row(rec.iteration, i, rec.positions[i].x, rec.positions[i].y,
                      rec.phase == Phase::One ? 1 : 2);
            }
        }
    }
    {
        csv::Writer w = detail::open_csv(cfg, "posterior_stats.csv");
        w.row("iteration", "max_variance", "mean_variance", "min_variance", "a",
              "phase", "h_est", "h_true");
        for (const IterationRecord& rec : log.records) {
            w.row(rec.iteration, rec.max_variance, rec.mean_variance,
                  rec.min_variance, rec.a_value, rec.phase == Phase::One ? 1 : 2,
                  rec.h_est, rec.h_true);
        }
    }
    for (const FieldSnapshot& snap : log.snapshots) {
        csv::Writer w = detail::open_csv(
            cfg, "fields_k" + std::to_string(snap.iteration) + ".csv");
        w.comment("grid origin=" + csv::cell(log.grid.origin.x) + "," +
                  csv::cell(log.grid.origin.y) + " step=" + csv::cell(log.grid.step) +
                  " nx=" + std::to_string(log.grid.nx) +
                  " ny=" + std::to_string(log.grid.ny));
        w.row("ix", "iy", "x", "y", "mu_hat", "variance");
        for (std::size_t j = 0; j < log.grid.nodes.size(); ++j) {
            const GridNode& node = log.grid.nodes[j];
            w.row(node.ix, node.iy, node.p.x, node.p.y, snap.mu_hat[j],
                  snap.variance[j]);
        }
    }

    const IdealResult ideal = ideal_configuration(cfg.scenario, log.final_positions);
    {
        csv::Writer w = detail::open_csv(cfg, "final_positions.csv");
        w.row("agent", "final_x", "final_y", "ideal_x", "ideal_y");
        for (std::size_t i = 0; i < log.final_positions.size(); ++i) {
            w.row(i, log.final_positions[i].x, log.final_positions[i].y,
                  ideal.positions[i].x, ideal.positions[i].y);
        }
    }

    if (log.switched) {
        out << "phase switch at iteration " << log.switch_iteration << "\n";
    } else {
        out << "no phase switch within " << log.records.size() << " iterations\n";
    }
    out << "final coverage cost (true field): " << log.records.back().h_true << "\n";
    out << "final max grid variance: " << log.records.back().max_variance << "\n";
    if (!ideal.converged) {
        out << "note: ideal-configuration Lloyd hit its iteration cap\n";
    }
    out << "wrote run files to " << cfg.out_dir << "\n";
    return 0;
}

/// Pure Lloyd descent on the true-field density. Exits nonzero if the
/// coverage cost ever increases beyond tolerance.
inline int cmd_lloyd(const CliConfig& cfg, std::ostream& out) {
    const ScenarioConfig& sc = cfg.scenario;
    const DensityField truth = detail::true_density(sc);
    const double tol = sc.grid_step * 1e-2;

    std::vector<Point2> positions = initial_positions(sc);

    csv::Writer w = detail::open_csv(cfg, "lloyd.csv");
    {
        std::string header = "iteration,h";
        for (std::size_t i = 0; i < positions.size(); ++i) {
            header += ",x" + std::to_string(i) + ",y" + std::to_string(i);
        }
        w.raw_row(header);
    }

    double h = coverage_value(positions, truth, sc.domain);
    w.raw_row(csv::cell(std::size_t{0}) + "," + csv::cell(h) +
              detail::joined_positions(positions));

    bool monotone = true;
    bool converged = false;
    std::size_t iterations = 0;
    for (std::size_t k = 1; k <= sc.max_iters; ++k) {
        const std::vector<Point2> next = lloyd_step(positions, truth, sc.domain);
        double displacement = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) {
            displacement = std::max(displacement, distance(next[i], positions[i]));
        }
        positions = next;
        const double h_next = coverage_value(positions, truth, sc.domain);
        w.raw_row(csv::cell(k) + "," + csv::cell(h_next) +
                  detail::joined_positions(positions));
        if (h_next > h + 1e-9) {
            out << "coverage cost increased at iteration " << k << ": " << h
                << " -> " << h_next << "\n";
            monotone = false;
        }
        h = h_next;
        iterations = k;
        if (displacement < tol) {
            converged = true;
            break;
        }
    }

    out << (converged ? "converged" : "iteration cap reached") << " after "
        << iterations << " steps, final coverage cost " << h << "\n";
    return monotone ? 0 : 1;
}

/// Monte-Carlo check of the exploration guarantee: fraction of trials whose
/// max grid variance has fallen below epsilon, per iteration.
inline int cmd_variance_decay(const CliConfig& cfg, std::ostream& out) {
    const VarianceDecayResult result =
        run_variance_decay(cfg.scenario, cfg.trials, cfg.epsilon);

    csv::Writer w = detail::open_csv(cfg, "variance_decay.csv");
    w.row("t", "fraction", "mean_max_variance");
    for (std::size_t t = 0; t < result.horizon; ++t) {
        w.row(t, result.fraction[t], result.mean_max_variance[t]);
    }

    std::size_t reached = 0;
    for (const auto& hit : result.hit) {
        if (hit) ++reached;
    }
    out << reached << "/" << cfg.trials << " trials reached max variance <= "
        << cfg.epsilon << " within " << result.horizon << " iterations\n";

    for (std::size_t t = 1; t < result.horizon; ++t) {
        if (result.fraction[t] < result.fraction[t - 1]) {
            out << "fraction decreased at t=" << t << "\n";
            return 1;
        }
    }
    return 0;
}

/// Regularized-estimator error against the true field for each requested
/// sample count, on one archived exploration run.
inline int cmd_rkhs_consistency(const CliConfig& cfg, std::ostream& out) {
    const std::vector<RkhsRow> rows =
        run_rkhs_consistency(cfg.scenario, cfg.alpha, cfg.t_list, cfg.gamma0);

    csv::Writer w = detail::open_csv(cfg, "rkhs_consistency.csv");
    w.row("t", "gamma", "sup_error", "mean_error");
    for (const RkhsRow& row : rows) {
        w.row(row.t, row.gamma, row.sup_error, row.mean_error);
    }

    for (const RkhsRow& row : rows) {
        out << "t=" << row.t << "  sup error " << row.sup_error << "  mean error "
            << row.mean_error << "\n";
    }
    return 0;
}

}  // namespace gpcover
