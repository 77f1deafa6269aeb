#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "gpcover/common.hpp"
#include "gpcover/geometry.hpp"

namespace gpcover {

struct GridNode {
    std::size_t ix = 0;
    std::size_t iy = 0;
    Point2 p;
};

/// Cell-centered lattice over a convex domain. The bounding box is divided
/// into square cells of the given pitch and each cell contributes its
/// midpoint, kept only if it lies inside the domain. Every node stands for
/// a cell of area step^2 in Riemann sums.
struct Grid {
    Point2 origin;  // lower-left corner of the domain bounding box
    double step = 0.0;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<GridNode> nodes;  // ordered by x, then y (lexicographic)

    double cell_area() const { return step * step; }
};

/// Lexicographic order on coordinates: x first, then y.
inline bool lex_less(Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
}

inline Grid make_grid(const ConvexPolygon& domain, double step) {
    if (!(step > 0.0)) throw Error("grid step must be > 0");
    auto [lo, hi] = domain.bounding_box();
    Grid g;
    g.origin = lo;
    g.step = step;
    // ceil with a relative guard so exact multiples do not gain a cell
    g.nx = static_cast<std::size_t>(std::ceil((hi.x - lo.x) / step - 1e-9));
    g.ny = static_cast<std::size_t>(std::ceil((hi.y - lo.y) / step - 1e-9));
    if (g.nx == 0) g.nx = 1;
    if (g.ny == 0) g.ny = 1;
    g.nodes.reserve(g.nx * g.ny);
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
        for (std::size_t iy = 0; iy < g.ny; ++iy) {
            Point2 p{lo.x + (static_cast<double>(ix) + 0.5) * step,
                     lo.y + (static_cast<double>(iy) + 0.5) * step};
            if (domain.contains(p)) {
                g.nodes.push_back({ix, iy, p});
            }
        }
    }
    return g;
}

}  // namespace gpcover
