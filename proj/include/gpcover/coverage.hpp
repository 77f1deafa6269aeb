#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gpcover/common.hpp"
#include "gpcover/geometry.hpp"
#include "gpcover/grid.hpp"

namespace gpcover {

/// Nonnegative density sampled on the cell-centered grid of a convex
/// domain; evaluation is nearest-node lookup. Used both for the true
/// sensory field and for clamped posterior estimates.
class DensityField {
public:
    DensityField(const ConvexPolygon& domain, double grid_step, std::vector<double> values)
        : domain_(domain), grid_(make_grid(domain, grid_step)), values_(std::move(values)) {
        if (values_.size() != grid_.nodes.size()) {
            throw Error("DensityField: " + std::to_string(values_.size()) +
                        " values for " + std::to_string(grid_.nodes.size()) + " grid nodes");
        }
        bool any_positive = false;
        for (double v : values_) {
            if (!(v >= 0.0)) throw Error("DensityField: negative or NaN value");
            if (v > 0.0) any_positive = true;
        }
        if (!any_positive) throw Error("DensityField: all values zero");
        build_index();
    }

    template <typename F>
    static DensityField from_function(const ConvexPolygon& domain, double grid_step, F f) {
        Grid g = make_grid(domain, grid_step);
        std::vector<double> values;
        values.reserve(g.nodes.size());
        for (const GridNode& n : g.nodes) values.push_back(f(n.p));
        return DensityField(domain, grid_step, std::move(values));
    }

    /// Builds a density from raw estimate values, clamping negatives to 0.
    /// The clamp count is reported through the warning sink.
    static DensityField from_estimate(const ConvexPolygon& domain, double grid_step,
                                      std::vector<double> raw) {
        std::size_t clamped = 0;
        for (double& v : raw) {
            if (v < 0.0) {
                v = 0.0;
                ++clamped;
            }
        }
        if (clamped > 0) {
            detail::log_warning("density estimate clamped at 0 on " +
                                std::to_string(clamped) + " grid nodes");
        }
        return DensityField(domain, grid_step, std::move(raw));
    }

    const ConvexPolygon& domain() const { return domain_; }
    const Grid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }

    /// Density at the grid node nearest to q.
    double operator()(Point2 q) const { return values_[nearest_node(q)]; }

    /// Index (into grid().nodes) of the node nearest to q.
    std::size_t nearest_node(Point2 q) const {
        const auto clamp_idx = [](double t, std::size_t n) {
            if (t < 0.0) return std::size_t{0};
            auto i = static_cast<std::size_t>(t);
            return i >= n ? n - 1 : i;
        };
        const std::size_t ix = clamp_idx((q.x - grid_.origin.x) / grid_.step, grid_.nx);
        const std::size_t iy = clamp_idx((q.y - grid_.origin.y) / grid_.step, grid_.ny);
        const std::size_t direct = index_[ix * grid_.ny + iy];
        if (direct != kNoNode) return direct;
        // the containing cell's midpoint fell outside a non-rectangular
        // domain; scan for the nearest kept node
        std::size_t best = 0;
        double best_d = squared_norm(q - grid_.nodes[0].p);
        for (std::size_t i = 1; i < grid_.nodes.size(); ++i) {
            const double d = squared_norm(q - grid_.nodes[i].p);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    }

private:
    static constexpr std::size_t kNoNode = static_cast<std::size_t>(-1);

    void build_index() {
        index_.assign(grid_.nx * grid_.ny, kNoNode);
        for (std::size_t i = 0; i < grid_.nodes.size(); ++i) {
            index_[grid_.nodes[i].ix * grid_.ny + grid_.nodes[i].iy] = i;
        }
    }

    ConvexPolygon domain_;
    Grid grid_;
    std::vector<double> values_;
    std::vector<std::size_t> index_;  // (ix, iy) -> node position, kNoNode if absent
};

/// Density-weighted centroid of a single cell: Riemann sum over the density
/// grid nodes lying inside the cell. Throws ZeroMass when no node with
/// positive density falls in the cell.
inline Point2 centroid(const ConvexPolygon& cell, const DensityField& density) {
    double mass = 0.0;
    Point2 moment{0.0, 0.0};
    const auto& nodes = density.grid().nodes;
    const auto& values = density.values();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!cell.contains(nodes[i].p)) continue;
        mass += values[i];
        moment = moment + values[i] * nodes[i].p;
    }
    if (!(mass > 0.0)) throw ZeroMass("centroid: cell carries no density mass");
    return (1.0 / mass) * moment;
}

namespace detail {

enum class ZeroMassPolicy {
    Throw,            // public operations: degenerate cells are an error
    UniformFallback,  // simulation loop: fall back to the unweighted node
                      // mean (empty cells keep their generator), so a run
                      // survives estimates that vanish on some cell
};

/// Per-generator weighted centroids with nodes assigned to their nearest
/// generator (lowest index on ties), the discrete counterpart of the
/// Voronoi-restricted integrals. Fixed iteration order keeps sums bitwise
/// reproducible.
inline std::vector<Point2> assignment_centroids(std::span<const Point2> generators,
                                                const DensityField& density,
                                                ZeroMassPolicy policy) {
    const std::size_t n = generators.size();
    std::vector<double> mass(n, 0.0);
    std::vector<Point2> moment(n, Point2{0.0, 0.0});
    std::vector<double> count(n, 0.0);
    std::vector<Point2> node_sum(n, Point2{0.0, 0.0});
    const auto& nodes = density.grid().nodes;
    const auto& values = density.values();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::size_t g = nearest_generator(generators, nodes[i].p);
        mass[g] += values[i];
        moment[g] = moment[g] + values[i] * nodes[i].p;
        count[g] += 1.0;
        node_sum[g] = node_sum[g] + nodes[i].p;
    }
    std::vector<Point2> result(n);
    for (std::size_t g = 0; g < n; ++g) {
        if (mass[g] > 0.0) {
            result[g] = (1.0 / mass[g]) * moment[g];
        } else if (policy == ZeroMassPolicy::Throw) {
            throw ZeroMass("cell " + std::to_string(g) + " carries no density mass");
        } else if (count[g] > 0.0) {
            result[g] = (1.0 / count[g]) * node_sum[g];
        } else {
            result[g] = generators[g];
        }
    }
    return result;
}

inline double coverage_sum(std::span<const Point2> generators,
                           std::span<const Point2> centers, const DensityField& density) {
    double h = 0.0;
    const auto& nodes = density.grid().nodes;
    const auto& values = density.values();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::size_t g = nearest_generator(generators, nodes[i].p);
        h += values[i] * squared_norm(nodes[i].p - centers[g]);
    }
    return h * density.grid().cell_area();
}

/// Nudges colliding centers back toward their own previous generator.
/// Returns whether any collision was found; throws DegenerateGenerators if
/// a pair cannot be separated.
inline bool separate_collisions(std::vector<Point2>& centers,
                                std::span<const Point2> generators, double nudge) {
    const std::size_t n = centers.size();
    bool collided = false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (distance(centers[i], centers[j]) > kGeneratorTol) continue;
            collided = true;
            for (std::size_t k : {i, j}) {
                Point2 back = generators[k] - centers[k];
                const double len = norm(back);
                if (len > 0.0) centers[k] = centers[k] + (nudge / len) * back;
            }
        }
    }
    if (collided) {
        log_warning("colliding centroids nudged apart");
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (distance(centers[i], centers[j]) <= kGeneratorTol) {
                    throw DegenerateGenerators("centroids coincide beyond repair");
                }
            }
        }
    }
    return collided;
}

}  // namespace detail

/// Coverage cost H: per-cell integral of the squared distance to the cell's
/// density centroid, as a Riemann sum with nearest-generator assignment.
/// A cell without density mass contributes exactly 0, whatever its center,
/// so the fallback centroids never influence the value.
inline double coverage_value(std::span<const Point2> generators, const DensityField& density,
                             const ConvexPolygon& domain) {
    voronoi_partition(generators, domain);  // surfaces precondition errors
    std::vector<Point2> centers = detail::assignment_centroids(
        generators, density, detail::ZeroMassPolicy::UniformFallback);
    return detail::coverage_sum(generators, centers, density);
}

/// One Lloyd iteration: every generator moves to its cell's density
/// centroid. Colliding centroids are nudged grid_step*1e-3 back toward
/// their own previous generator (with a warning); if they still coincide
/// the configuration is reported as degenerate.
inline std::vector<Point2> lloyd_step(std::span<const Point2> generators,
                                      const DensityField& density,
                                      const ConvexPolygon& domain) {
    voronoi_partition(generators, domain);
    std::vector<Point2> centers =
        detail::assignment_centroids(generators, density, detail::ZeroMassPolicy::Throw);
    detail::separate_collisions(centers, generators, density.grid().step * 1e-3);
    return centers;
}

}  // namespace gpcover
