#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gpcover/common.hpp"
#include "gpcover/geometry.hpp"
#include "gpcover/grid.hpp"
#include "gpcover/kernel.hpp"
#include "gpcover/rng.hpp"

namespace gpcover {

inline constexpr std::size_t kDefaultMaxMeasurements = 4000;

/// Gaussian random-field regressor over an append-only measurement archive.
///
/// Maintains the lower Cholesky factor L of (Kbar + noise_var*I) and the
/// coefficient vector c = (Kbar + noise_var*I)^-1 y. New measurements are
/// absorbed by a rank-p block append on L rather than refactorizing.
///
/// Queries are const and safe to run concurrently; add_measurements is a
/// single-writer operation.
template <RadialKernel K>
class FieldModel {
public:
    FieldModel(K kernel, double noise_var,
               std::size_t max_measurements = kDefaultMaxMeasurements)
        : kernel_(std::move(kernel)), noise_var_(noise_var), cap_(max_measurements) {
        if (!(noise_var_ > 0.0)) throw Error("noise_var must be > 0");
    }

    std::size_t size() const { return m_; }
    const K& kernel() const { return kernel_; }
    double noise_var() const { return noise_var_; }
    std::size_t max_measurements() const { return cap_; }
    const std::vector<Point2>& locations() const { return locs_; }
    const std::vector<double>& values() const { return values_; }

    /// Lower-triangular factor of the regularized Gram matrix, size() rows.
    /// Entries above the diagonal are unspecified.
    auto chol() const { return L_.topLeftCorner(m_, m_); }

    auto coeffs() const { return coeffs_.head(m_); }

    /// Appends a block of measurements and updates factor and coefficients.
    /// Throws NumericalBreakdown if the factor update meets a non-positive
    /// pivot, Error when the archive would exceed max_measurements.
    void add_measurements(std::span<const Point2> new_locations,
                          std::span<const double> new_values) {
        const std::size_t p = new_locations.size();
        if (p != new_values.size()) {
            throw Error("add_measurements: locations/values length mismatch");
        }
        if (p == 0) return;
        for (Point2 q : new_locations) {
            if (!is_finite(q)) throw Error("add_measurements: non-finite location");
        }
        for (double v : new_values) {
            if (!std::isfinite(v)) throw Error("add_measurements: non-finite value");
        }
        if (m_ + p > cap_) {
            throw Error("measurement cap exceeded (max_measurements = " +
                        std::to_string(cap_) + ")");
        }
        ensure_capacity(m_ + p);

        Eigen::MatrixXd B(m_, p);
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    kernel_(locs_[i], new_locations[j]);
            }
        }
        Eigen::MatrixXd C(p, p);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    kernel_(new_locations[i], new_locations[j]);
            }
            C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += noise_var_;
        }

        const auto m = static_cast<Eigen::Index>(m_);
        const auto pe = static_cast<Eigen::Index>(p);
        Eigen::MatrixXd X;
        if (m_ > 0) {
            X = L_.topLeftCorner(m, m).triangularView<Eigen::Lower>().solve(B);
            C.noalias() -= X.transpose() * X;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(C);
        if (llt.info() != Eigen::Success) {
            throw NumericalBreakdown("kernel matrix factor update lost positive definiteness");
        }
        if (m_ > 0) L_.block(m, 0, pe, m) = X.transpose();
        L_.block(m, m, pe, pe) = llt.matrixL();

        locs_.insert(locs_.end(), new_locations.begin(), new_locations.end());
        values_.insert(values_.end(), new_values.begin(), new_values.end());
        m_ += p;
        refresh_coeffs();
    }

    /// Posterior mean at x; 0 with an empty archive (zero-mean prior).
    double posterior_mean(Point2 x) const {
        if (m_ == 0) return 0.0;
        return kernel_vector(x).dot(coeffs_.head(m_));
    }

    /// Posterior variance at x, clamped to [0, amplitude].
    double posterior_variance(Point2 x) const {
        const double lambda = kernel_.amplitude();
        if (m_ == 0) return lambda;
        Eigen::VectorXd z = kernel_vector(x);
        L_.topLeftCorner(m_, m_).triangularView<Eigen::Lower>().solveInPlace(z);
        return std::clamp(lambda - z.squaredNorm(), 0.0, lambda);
    }

    /// Analytic gradient of the posterior variance at x.
    Point2 variance_gradient(Point2 x) const {
        if (m_ == 0) return {0.0, 0.0};
        Eigen::VectorXd w = kernel_vector(x);
        const auto L = L_.topLeftCorner(m_, m_);
        L.triangularView<Eigen::Lower>().solveInPlace(w);
        L.transpose().triangularView<Eigen::Upper>().solveInPlace(w);
        Point2 g{0.0, 0.0};
        for (std::size_t j = 0; j < m_; ++j) {
            g = g + (-2.0 * w(static_cast<Eigen::Index>(j))) *
                        kernel_.gradient_first_arg(x, locs_[j]);
        }
        return g;
    }

    /// Kernel section k_x against the archive, as a dense vector.
    Eigen::VectorXd kernel_vector(Point2 x) const {
        Eigen::VectorXd k(m_);
        for (std::size_t j = 0; j < m_; ++j) {
            k(static_cast<Eigen::Index>(j)) = kernel_(locs_[j], x);
        }
        return k;
    }

private:
    void ensure_capacity(std::size_t need) {
        const auto have = static_cast<std::size_t>(L_.rows());
        if (need <= have) return;
        std::size_t next = have == 0 ? 64 : have * 2;
        while (next < need) next *= 2;
        next = std::min(next, cap_);
        Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(next, next);
        grown.topLeftCorner(m_, m_) = L_.topLeftCorner(m_, m_);
        L_ = std::move(grown);
        coeffs_.conservativeResize(static_cast<Eigen::Index>(next));
    }

    void refresh_coeffs() {
        Eigen::Map<const Eigen::VectorXd> y(values_.data(), static_cast<Eigen::Index>(m_));
        const auto L = L_.topLeftCorner(m_, m_);
        Eigen::VectorXd c = L.triangularView<Eigen::Lower>().solve(y);
        L.transpose().triangularView<Eigen::Upper>().solveInPlace(c);
        coeffs_.head(m_) = c;
    }

    K kernel_;
    double noise_var_;
    std::size_t cap_;
    std::size_t m_ = 0;
    std::vector<Point2> locs_;
    std::vector<double> values_;
    Eigen::MatrixXd L_;       // capacity-managed; live part is topLeft(m_, m_)
    Eigen::VectorXd coeffs_;  // live part is head(m_)
};

/// Incrementally tracked posterior mean and variance on a fixed node set.
///
/// Keeps z = L^-1 k_node per node so each sync after a block append costs
/// O(nodes * new * old) instead of a full O(nodes * m^2) rescan. Agrees
/// with the direct per-node queries to tight tolerance; the simulation loop
/// uses this, tests cross-check it against the direct route.
template <RadialKernel K>
class GridPosterior {
public:
    GridPosterior(const FieldModel<K>& model, std::span<const GridNode> nodes)
        : nodes_(nodes.begin(), nodes.end()) {
        const auto n = static_cast<Eigen::Index>(nodes_.size());
        sections_.resize(0, n);
        z_.resize(0, n);
        raw_var_ = Eigen::VectorXd::Constant(n, model.kernel().amplitude());
        means_ = Eigen::VectorXd::Zero(n);
        sync(model);
    }

    std::size_t node_count() const { return nodes_.size(); }
    const std::vector<GridNode>& nodes() const { return nodes_; }

    /// Absorbs measurements appended to the model since the last sync.
    void sync(const FieldModel<K>& model) {
        const std::size_t m_new = model.size();
        if (m_new < synced_) {
            throw Error("GridPosterior: model shrank; trackers are append-only");
        }
        const std::size_t n = nodes_.size();
        const auto ne = static_cast<Eigen::Index>(n);
        if (m_new > synced_) {
            const std::size_t p = m_new - synced_;
            const auto pe = static_cast<Eigen::Index>(p);
            const auto me = static_cast<Eigen::Index>(synced_);
            ensure_rows(m_new);
            const auto& locs = model.locations();
            for (std::size_t j = 0; j < p; ++j) {
                for (std::size_t i = 0; i < n; ++i) {
                    sections_(me + static_cast<Eigen::Index>(j),
                              static_cast<Eigen::Index>(i)) =
                        model.kernel()(locs[synced_ + j], nodes_[i].p);
                }
            }
            auto chol = model.chol();
            Eigen::MatrixXd u = sections_.block(me, 0, pe, ne);
            if (synced_ > 0) {
                u.noalias() -= chol.block(me, 0, pe, me) * z_.topRows(me);
            }
            chol.block(me, me, pe, pe)
                .template triangularView<Eigen::Lower>()
                .solveInPlace(u);
            z_.block(me, 0, pe, ne) = u;
            raw_var_ -= u.colwise().squaredNorm();
            synced_ = m_new;
        }
        const auto me = static_cast<Eigen::Index>(synced_);
        if (synced_ > 0) {
            means_.noalias() = sections_.topRows(me).transpose() * model.coeffs();
        }
        lambda_ = model.kernel().amplitude();
    }

    double mean(std::size_t i) const { return means_(static_cast<Eigen::Index>(i)); }

    double variance(std::size_t i) const {
        return std::clamp(raw_var_(static_cast<Eigen::Index>(i)), 0.0, lambda_);
    }

    /// Maximum variance over the nodes and the attaining node, lowest
    /// lexicographic (x, then y) on ties. Throws EmptyGrid with no nodes.
    std::pair<double, Point2> max_variance() const {
        if (nodes_.empty()) throw EmptyGrid("GridPosterior: no nodes");
        std::size_t best = 0;
        double best_v = variance(0);
        for (std::size_t i = 1; i < nodes_.size(); ++i) {
            const double v = variance(i);
            if (v > best_v || (v == best_v && lex_less(nodes_[i].p, nodes_[best].p))) {
                best_v = v;
                best = i;
            }
        }
        return {best_v, nodes_[best].p};
    }

private:
    void ensure_rows(std::size_t need) {
        const auto have = static_cast<std::size_t>(sections_.rows());
        if (need <= have) return;
        std::size_t next = have == 0 ? 64 : have * 2;
        while (next < need) next *= 2;
        const auto ne = static_cast<Eigen::Index>(next);
        sections_.conservativeResize(ne, Eigen::NoChange);
        z_.conservativeResize(ne, Eigen::NoChange);
    }

    std::vector<GridNode> nodes_;
    Eigen::MatrixXd sections_;  // row j = kernel section of data point j on the nodes
    Eigen::MatrixXd z_;         // column i = L^-1 k_{node i}
    Eigen::VectorXd raw_var_;   // unclamped posterior variance per node
    Eigen::VectorXd means_;
    double lambda_ = 0.0;
    std::size_t synced_ = 0;
};

/// Maximum posterior variance over the grid nodes of the given pitch inside
/// the domain. Direct scan; the attaining node breaks ties toward the lowest
/// lexicographic (x, then y) coordinates.
template <RadialKernel K>
std::pair<double, Point2> max_variance_on_grid(const FieldModel<K>& model,
                                               const ConvexPolygon& domain, double step) {
    Grid grid = make_grid(domain, step);
    if (grid.nodes.empty()) throw EmptyGrid("max_variance_on_grid: no grid node in domain");
    double best_v = -1.0;
    Point2 best{0.0, 0.0};
    for (const GridNode& node : grid.nodes) {
        const double v = model.posterior_variance(node.p);
        if (v > best_v || (v == best_v && lex_less(node.p, best))) {
            best_v = v;
            best = node.p;
        }
    }
    return {best_v, best};
}

/// Worst regularized-empirical-risk gap over random unit-RKHS-norm probes.
///
/// J(f) = (1/t) sum_i (y_i - f(x_i))^2 + gamma |f|_H^2 with gamma =
/// noise_var/t. The posterior mean minimizes J over the span of the kernel
/// sections, so J(mu_hat) - J(mu_hat + eps*delta) <= 0 up to rounding for
/// every probe delta. Returns the largest (worst) gap; 0 when probe_count
/// is 0 (the identically-zero perturbation).
template <RadialKernel K>
double tikhonov_gap(const FieldModel<K>& model, std::size_t probe_count,
                    std::uint64_t rng_seed, double epsilon = 1e-3) {
    const std::size_t m = model.size();
    if (m == 0) throw Error("tikhonov_gap: needs at least one measurement");
    const auto me = static_cast<Eigen::Index>(m);
    const auto& locs = model.locations();

    Eigen::MatrixXd Kbar(me, me);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            Kbar(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                model.kernel()(locs[i], locs[j]);
        }
    }
    Eigen::Map<const Eigen::VectorXd> y(model.values().data(), me);
    const double t = static_cast<double>(m);
    const double gamma = model.noise_var() / t;

    auto J = [&](const Eigen::VectorXd& d) {
        Eigen::VectorXd fx = Kbar * d;
        return (y - fx).squaredNorm() / t + gamma * d.dot(fx);
    };

    const Eigen::VectorXd c = model.coeffs();
    const double J_c = J(c);
    bool any = false;
    double worst = 0.0;  // the zero perturbation's gap, returned with no probes
    SplitMix64 rng(derive_seed(rng_seed, "tikhonov-probe"));
    for (std::size_t k = 0; k < probe_count; ++k) {
        Eigen::VectorXd d(me);
        for (Eigen::Index i = 0; i < me; ++i) d(i) = standard_normal(rng);
        const double rkhs_sq = d.dot(Kbar * d);
        if (!(rkhs_sq > 0.0)) continue;
        d *= epsilon / std::sqrt(rkhs_sq);
        const double gap = J_c - J(c + d);
        worst = any ? std::max(worst, gap) : gap;
        any = true;
    }
    return worst;
}

}  // namespace gpcover
