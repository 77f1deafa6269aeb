#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gpcover/common.hpp"

namespace gpcover {

// Tolerances used throughout the geometric predicates.
inline constexpr double kCollinearTol = 1e-12;  // cross-product magnitude
inline constexpr double kBoundaryTol = 1e-12;   // distance to an edge line
inline constexpr double kGeneratorTol = 1e-9;   // minimum generator separation

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
    friend bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double squared_norm(Point2 p) { return p.x * p.x + p.y * p.y; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// A strictly convex polygon with counter-clockwise vertex order.
///
/// Construction goes through from_vertices(), which drops consecutive
/// duplicate and collinear vertices and then validates convexity and
/// orientation. Instances are immutable.
class ConvexPolygon {
public:
    /// Builds a polygon from CCW vertices. Throws Error if fewer than three
    /// distinct vertices survive pruning, if the orientation is clockwise,
    /// or if any interior angle is reflex.
    static ConvexPolygon from_vertices(std::vector<Point2> vertices);

    /// Axis-aligned rectangle helper (CCW).
    static ConvexPolygon rectangle(Point2 lo, Point2 hi);

    const std::vector<Point2>& vertices() const { return verts_; }
    std::size_t size() const { return verts_.size(); }

    /// Shoelace area; positive for the CCW invariant.
    double area() const;

    /// Inside-or-on-boundary test; boundary band of width tol.
    bool contains(Point2 p, double tol = kBoundaryTol) const;

    /// Arithmetic mean of the vertices; always interior for a convex polygon.
    Point2 vertex_mean() const;

    std::pair<Point2, Point2> bounding_box() const;

    /// One "x,y" pair per line.
    std::string to_text() const;
    static ConvexPolygon from_text(std::string_view text);

private:
    explicit ConvexPolygon(std::vector<Point2> verts) : verts_(std::move(verts)) {}
    std::vector<Point2> verts_;
};

/// A Voronoi partition of a convex domain: one convex cell per generator.
struct VoronoiPartition {
    std::vector<Point2> generators;
    std::vector<ConvexPolygon> cells;
};

double polygon_area(const ConvexPolygon& poly);
bool contains(const ConvexPolygon& poly, Point2 p);

/// Intersects poly with the half-plane of points at least as close to a as
/// to b. Returns nullopt when the intersection is empty or degenerate.
/// Throws DegenerateGenerators when a and b coincide within 1e-12.
std::optional<ConvexPolygon> clip_halfplane(const ConvexPolygon& poly, Point2 a, Point2 b);

/// Voronoi cells of the generators inside the domain, by iterated half-plane
/// clipping. Generators must be pairwise distinct (1e-9) and inside the
/// domain; violations throw DegenerateGenerators / OutOfDomain.
VoronoiPartition voronoi_partition(std::span<const Point2> generators,
                                   const ConvexPolygon& domain);

/// Index of the generator closest to p; ties go to the lowest index.
std::size_t nearest_generator(std::span<const Point2> generators, Point2 p);

// ---------------------------------------------------------------------------

namespace detail {

// Removes consecutive duplicates and collinear middle vertices.
inline std::vector<Point2> prune_vertices(std::vector<Point2> v) {
    // duplicates first
    std::vector<Point2> out;
    out.reserve(v.size());
    for (const Point2& p : v) {
        if (out.empty() || squared_norm(p - out.back()) > kCollinearTol * kCollinearTol) {
            out.push_back(p);
        }
    }
    while (out.size() > 1 &&
           squared_norm(out.front() - out.back()) <= kCollinearTol * kCollinearTol) {
        out.pop_back();
    }
    if (out.size() < 3) return out;
    // collinear elimination; repeat until stable because removing a vertex
    // can make its neighbours collinear
    bool changed = true;
    while (changed && out.size() >= 3) {
        changed = false;
        std::vector<Point2> next;
        next.reserve(out.size());
        const std::size_t n = out.size();
        for (std::size_t i = 0; i < n; ++i) {
            Point2 prev = out[(i + n - 1) % n];
            Point2 cur = out[i];
            Point2 nxt = out[(i + 1) % n];
            if (std::abs(cross(cur - prev, nxt - cur)) <= kCollinearTol) {
                changed = true;
                continue;
            }
            next.push_back(cur);
        }
        out = std::move(next);
    }
    return out;
}

}  // namespace detail

inline ConvexPolygon ConvexPolygon::from_vertices(std::vector<Point2> vertices) {
    for (const Point2& p : vertices) {
        if (!is_finite(p)) throw Error("polygon vertex is not finite");
    }
    std::vector<Point2> v = detail::prune_vertices(std::move(vertices));
    if (v.size() < 3) throw Error("polygon needs at least 3 non-collinear vertices");
    double twice_area = 0.0;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        twice_area += cross(v[i], v[(i + 1) % n]);
    }
    if (twice_area <= 0.0) throw Error("polygon vertices must be counter-clockwise");
    for (std::size_t i = 0; i < n; ++i) {
        Point2 e0 = v[(i + 1) % n] - v[i];
        Point2 e1 = v[(i + 2) % n] - v[(i + 1) % n];
        if (cross(e0, e1) <= 0.0) throw Error("polygon is not strictly convex");
    }
    return ConvexPolygon(std::move(v));
}

inline ConvexPolygon ConvexPolygon::rectangle(Point2 lo, Point2 hi) {
    return from_vertices({{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}});
}

inline double ConvexPolygon::area() const {
    double twice = 0.0;
    const std::size_t n = verts_.size();
    for (std::size_t i = 0; i < n; ++i) {
        twice += cross(verts_[i], verts_[(i + 1) % n]);
    }
    return 0.5 * twice;
}

inline bool ConvexPolygon::contains(Point2 p, double tol) const {
    const std::size_t n = verts_.size();
    for (std::size_t i = 0; i < n; ++i) {
        Point2 a = verts_[i];
        Point2 b = verts_[(i + 1) % n];
        Point2 e = b - a;
        // signed distance of p to the edge line, positive on the interior side
        double s = cross(e, p - a) / norm(e);
        if (s < -tol) return false;
    }
    return true;
}

inline Point2 ConvexPolygon::vertex_mean() const {
    Point2 m{0.0, 0.0};
    for (const Point2& p : verts_) m = m + p;
    return (1.0 / static_cast<double>(verts_.size())) * m;
}

inline std::pair<Point2, Point2> ConvexPolygon::bounding_box() const {
    Point2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Point2 hi{-lo.x, -lo.y};
    for (const Point2& p : verts_) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    return {lo, hi};
}

inline std::string ConvexPolygon::to_text() const {
    std::ostringstream os;
    os.precision(17);
    for (const Point2& p : verts_) {
        os << p.x << "," << p.y << "\n";
    }
    return os.str();
}

inline ConvexPolygon ConvexPolygon::from_text(std::string_view text) {
    std::vector<Point2> verts;
    std::istringstream is{std::string(text)};
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        Point2 p;
        if (!(ls >> p.x >> p.y)) throw Error("polygon text: bad vertex line '" + line + "'");
        verts.push_back(p);
    }
    return from_vertices(std::move(verts));
}

inline double polygon_area(const ConvexPolygon& poly) { return poly.area(); }

inline bool contains(const ConvexPolygon& poly, Point2 p) { return poly.contains(p); }

inline std::optional<ConvexPolygon> clip_halfplane(const ConvexPolygon& poly, Point2 a,
                                                   Point2 b) {
    if (distance(a, b) <= 1e-12) {
        throw DegenerateGenerators("clip_halfplane: generators coincide");
    }
    // Keep set {q : ||q-a|| <= ||q-b||}  <=>  n.q <= d with n = b-a,
    // d = (|b|^2 - |a|^2)/2. Signed distances are normalized by |n| so the
    // boundary tolerance is a Euclidean band.
    const Point2 n = b - a;
    const double d = 0.5 * (squared_norm(b) - squared_norm(a));
    const double nn = norm(n);

    const std::vector<Point2>& v = poly.vertices();
    const std::size_t m = v.size();
    std::vector<double> s(m);
    for (std::size_t i = 0; i < m; ++i) {
        s[i] = (dot(n, v[i]) - d) / nn;  // > 0 means outside
    }
    std::vector<Point2> out;
    out.reserve(m + 2);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = (i + 1) % m;
        const bool in_i = s[i] <= kBoundaryTol;
        const bool in_j = s[j] <= kBoundaryTol;
        if (in_i) out.push_back(v[i]);
        if (in_i != in_j) {
            const double t = s[i] / (s[i] - s[j]);
            out.push_back(v[i] + t * (v[j] - v[i]));
        }
    }
    std::vector<Point2> pruned = detail::prune_vertices(std::move(out));
    if (pruned.size() < 3) return std::nullopt;
    ConvexPolygon result = ConvexPolygon::from_vertices(std::move(pruned));
    if (result.area() <= kCollinearTol) return std::nullopt;
    return result;
}

inline std::size_t nearest_generator(std::span<const Point2> generators, Point2 p) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < generators.size(); ++i) {
        const double d = squared_norm(p - generators[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

inline VoronoiPartition voronoi_partition(std::span<const Point2> generators,
                                          const ConvexPolygon& domain) {
    const std::size_t n = generators.size();
    if (n == 0) throw Error("voronoi_partition: no generators");
    for (std::size_t i = 0; i < n; ++i) {
        if (!domain.contains(generators[i])) {
            throw OutOfDomain("voronoi_partition: generator outside the domain");
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            if (distance(generators[i], generators[j]) <= kGeneratorTol) {
                throw DegenerateGenerators("voronoi_partition: coincident generators");
            }
        }
    }
    VoronoiPartition part;
    part.generators.assign(generators.begin(), generators.end());
    part.cells.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::optional<ConvexPolygon> cell = domain;
        for (std::size_t j = 0; j < n && cell; ++j) {
            if (j == i) continue;
            cell = clip_halfplane(*cell, generators[i], generators[j]);
        }
        if (!cell) {
            // unreachable for distinct in-domain generators: the generator
            // itself always survives every bisector clip
            throw Error("voronoi_partition: empty cell");
        }
        part.cells.push_back(std::move(*cell));
    }
    return part;
}

}  // namespace gpcover
