#pragma once

#include <cmath>
#include <concepts>

#include "gpcover/common.hpp"
#include "gpcover/geometry.hpp"

namespace gpcover {

/// Radial covariance kernel: symmetric, K(x,x) constant, monotone decay in
/// the pair distance, differentiable in the first argument.
template <typename K>
concept RadialKernel = requires(const K k, Point2 a, Point2 b) {
    { k(a, b) } -> std::convertible_to<double>;
    { k.amplitude() } -> std::convertible_to<double>;
    { k.gradient_first_arg(a, b) } -> std::convertible_to<Point2>;
};

/// K(a,b) = amplitude * exp(-|a-b|^2 / lengthscale_sq).
class GaussianKernel {
public:
    explicit GaussianKernel(double lengthscale_sq, double amplitude = 1.0)
        : ls2_(lengthscale_sq), amp_(amplitude) {
        if (!(ls2_ > 0.0)) throw Error("kernel lengthscale_sq must be > 0");
        if (!(amp_ > 0.0)) throw Error("kernel amplitude must be > 0");
    }

    double operator()(Point2 a, Point2 b) const {
        return amp_ * std::exp(-squared_norm(a - b) / ls2_);
    }

    /// K(x,x); the prior variance.
    double amplitude() const { return amp_; }

    double lengthscale_sq() const { return ls2_; }

    /// d/da K(a,b).
    Point2 gradient_first_arg(Point2 a, Point2 b) const {
        return (-2.0 / ls2_ * (*this)(a, b)) * (a - b);
    }

private:
    double ls2_;
    double amp_;
};

static_assert(RadialKernel<GaussianKernel>);

}  // namespace gpcover
