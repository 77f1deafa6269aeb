#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "gpcover/geometry.hpp"

using namespace gpcover;

namespace {

ConvexPolygon unit_square() {
    return ConvexPolygon::rectangle({0.0, 0.0}, {1.0, 1.0});
}

bool is_strictly_convex_ccw(const ConvexPolygon& poly) {
    const auto& v = poly.vertices();
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        Point2 e0 = v[(i + 1) % n] - v[i];
        Point2 e1 = v[(i + 2) % n] - v[(i + 1) % n];
        if (cross(e0, e1) <= 0.0) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("polygon construction validates shape") {
    REQUIRE_THROWS_AS(ConvexPolygon::from_vertices({{0, 0}, {1, 0}}), Error);
    // clockwise
    REQUIRE_THROWS_AS(ConvexPolygon::from_vertices({{0, 0}, {0, 1}, {1, 1}, {1, 0}}), Error);
    // reflex vertex
    REQUIRE_THROWS_AS(
        ConvexPolygon::from_vertices({{0, 0}, {2, 0}, {1, 0.1}, {2, 2}, {0, 2}}), Error);
    // all vertices collinear
    REQUIRE_THROWS_AS(ConvexPolygon::from_vertices({{0, 0}, {1, 1}, {2, 2}, {3, 3}}), Error);
    REQUIRE_THROWS_AS(
        ConvexPolygon::from_vertices({{0, 0}, {1, 0}, {std::nan(""), 1}}), Error);

    // collinear midpoints and duplicates are pruned, not fatal
    ConvexPolygon square = ConvexPolygon::from_vertices(
        {{0, 0}, {0.5, 0}, {1, 0}, {1, 0}, {1, 1}, {0, 1}});
    REQUIRE(square.size() == 4);
    REQUIRE(is_strictly_convex_ccw(square));
}

TEST_CASE("polygon_area matches closed forms") {
    CHECK(polygon_area(unit_square()) == Catch::Approx(1.0).margin(1e-15));

    ConvexPolygon tri = ConvexPolygon::from_vertices({{0, 0}, {1, 0}, {0, 1}});
    CHECK(polygon_area(tri) == Catch::Approx(0.5).margin(1e-15));

    std::vector<Point2> hex;
    for (int k = 0; k < 6; ++k) {
        double th = M_PI / 3.0 * k;
        hex.push_back({std::cos(th), std::sin(th)});
    }
    CHECK(polygon_area(ConvexPolygon::from_vertices(hex)) ==
          Catch::Approx(2.598076211353316).margin(1e-12));
}

TEST_CASE("contains is boundary-inclusive") {
    ConvexPolygon sq = unit_square();
    CHECK(contains(sq, {0.5, 0.5}));
    CHECK_FALSE(contains(sq, {1.5, 0.5}));
    CHECK(contains(sq, {1.0, 0.3}));
    CHECK(contains(sq, {0.0, 0.0}));
    CHECK_FALSE(contains(sq, {1.0 + 1e-9, 0.3}));
}

TEST_CASE("clip_halfplane basic cuts") {
    ConvexPolygon sq = unit_square();

    SECTION("vertical bisector by symmetry") {
        auto half = clip_halfplane(sq, {0.25, 0.5}, {0.75, 0.5});
        REQUIRE(half.has_value());
        CHECK(polygon_area(*half) == Catch::Approx(0.5).margin(1e-12));
        auto [lo, hi] = half->bounding_box();
        CHECK(lo.x == Catch::Approx(0.0).margin(1e-12));
        CHECK(hi.x == Catch::Approx(0.5).margin(1e-12));
        CHECK(lo.y == Catch::Approx(0.0).margin(1e-12));
        CHECK(hi.y == Catch::Approx(1.0).margin(1e-12));
    }

    SECTION("bisector outside the domain leaves it unchanged") {
        auto whole = clip_halfplane(sq, {0.5, 0.5}, {5.0, 0.5});
        REQUIRE(whole.has_value());
        CHECK(whole->size() == 4);
        CHECK(polygon_area(*whole) == Catch::Approx(1.0).margin(1e-12));
    }

    SECTION("empty when the keep side misses the polygon") {
        auto none = clip_halfplane(sq, {5.0, 0.5}, {0.5, 0.5});
        CHECK_FALSE(none.has_value());
    }

    SECTION("coincident points rejected") {
        REQUIRE_THROWS_AS(clip_halfplane(sq, {0.3, 0.3}, {0.3, 0.3}), DegenerateGenerators);
        REQUIRE_THROWS_AS(clip_halfplane(sq, {0.3, 0.3}, {0.3, 0.3 + 1e-13}),
                          DegenerateGenerators);
    }
}

TEST_CASE("clip_halfplane diagonal cut: vertex and sample oracles") {
    // Bisector of (0.2,0.2) and (0.8,0.8) is the line x+y=1; it passes
    // exactly through two corners of the square, so the cut keeps the
    // lower-left triangle.
    ConvexPolygon sq = unit_square();
    Point2 a{0.2, 0.2};
    Point2 b{0.8, 0.8};
    auto cut = clip_halfplane(sq, a, b);
    REQUIRE(cut.has_value());
    CHECK(is_strictly_convex_ccw(*cut));
    CHECK(polygon_area(*cut) == Catch::Approx(0.5).margin(1e-12));

    // every output vertex is equidistant from a and b or lies on an edge of
    // the original square
    for (const Point2& v : cut->vertices()) {
        bool equidistant = std::abs(distance(v, a) - distance(v, b)) < 1e-9;
        bool on_square_edge =
            std::abs(v.x) < 1e-9 || std::abs(v.x - 1.0) < 1e-9 ||
            std::abs(v.y) < 1e-9 || std::abs(v.y - 1.0) < 1e-9;
        CHECK((equidistant || on_square_edge));
    }

    // random interior samples classify consistently with the half-plane
    std::mt19937 gen(20240816);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        Point2 q{u(gen), u(gen)};
        bool in_cut = cut->contains(q, 1e-9);
        bool closer_to_a = distance(q, a) <= distance(q, b) + 1e-9;
        if (in_cut) {
            CHECK(closer_to_a);
        } else {
            CHECK(distance(q, a) >= distance(q, b) - 1e-9);
        }
    }
}

TEST_CASE("clip_halfplane is idempotent and preserves convexity") {
    ConvexPolygon sq = unit_square();
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int k = 0; k < 50; ++k) {
        Point2 a{u(gen), u(gen)};
        Point2 b{u(gen), u(gen)};
        if (distance(a, b) < 1e-6) continue;
        auto once = clip_halfplane(sq, a, b);
        if (!once) continue;
        CHECK(is_strictly_convex_ccw(*once));
        auto twice = clip_halfplane(*once, a, b);
        REQUIRE(twice.has_value());
        CHECK(polygon_area(*twice) == Catch::Approx(polygon_area(*once)).margin(1e-12));
        REQUIRE(twice->size() == once->size());
        for (std::size_t i = 0; i < once->size(); ++i) {
            CHECK(distance(twice->vertices()[i], once->vertices()[i]) < 1e-9);
        }
    }
}

TEST_CASE("voronoi_partition simple configurations") {
    ConvexPolygon sq = unit_square();

    SECTION("single generator owns the whole domain") {
        std::vector<Point2> g{{0.3, 0.7}};
        auto part = voronoi_partition(g, sq);
        REQUIRE(part.cells.size() == 1);
        CHECK(polygon_area(part.cells[0]) == Catch::Approx(1.0).margin(1e-12));
    }

    SECTION("four symmetric generators give quadrant cells") {
        std::vector<Point2> g{{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
        auto part = voronoi_partition(g, sq);
        REQUIRE(part.cells.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(polygon_area(part.cells[i]) == Catch::Approx(0.25).margin(1e-12));
            CHECK(part.cells[i].contains(g[i]));
            auto [lo, hi] = part.cells[i].bounding_box();
            CHECK(hi.x - lo.x == Catch::Approx(0.5).margin(1e-12));
            CHECK(hi.y - lo.y == Catch::Approx(0.5).margin(1e-12));
        }
    }

    SECTION("preconditions enforced") {
        std::vector<Point2> dup{{0.3, 0.3}, {0.3, 0.3 + 1e-10}};
        REQUIRE_THROWS_AS(voronoi_partition(dup, sq), DegenerateGenerators);
        std::vector<Point2> outside{{0.3, 0.3}, {1.5, 0.5}};
        REQUIRE_THROWS_AS(voronoi_partition(outside, sq), OutOfDomain);
    }
}

TEST_CASE("voronoi_partition agrees with brute-force nearest neighbor") {
    ConvexPolygon sq = unit_square();
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    std::vector<Point2> g;
    for (int i = 0; i < 8; ++i) g.push_back({u(gen), u(gen)});
    auto part = voronoi_partition(g, sq);
    REQUIRE(part.cells.size() == 8);

    double total = 0.0;
    for (const auto& c : part.cells) total += polygon_area(c);
    CHECK(total == Catch::Approx(1.0).epsilon(1e-9));

    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(part.cells[i].contains(g[i]));
    }

    int strict_hits = 0;
    for (int k = 0; k < 10000; ++k) {
        Point2 q{u(gen), u(gen)};
        std::size_t nn = nearest_generator(g, q);
        // strictly inside the nearest cell; points within 1e-9 of a cell
        // boundary are equidistant calls and skipped
        if (part.cells[nn].contains(q, -1e-9)) {
            ++strict_hits;
            for (std::size_t i = 0; i < part.cells.size(); ++i) {
                if (i == nn) continue;
                CHECK_FALSE(part.cells[i].contains(q, -1e-9));
            }
        } else {
            CHECK(part.cells[nn].contains(q, 1e-9));
        }
    }
    CHECK(strict_hits > 9900);
}

TEST_CASE("nearest_generator breaks ties toward the lowest index") {
    std::vector<Point2> g{{0.25, 0.5}, {0.75, 0.5}};
    CHECK(nearest_generator(g, {0.5, 0.5}) == 0);
    std::vector<Point2> g2{{0.75, 0.5}, {0.25, 0.5}, {0.25, 0.5}};
    CHECK(nearest_generator(g2, {0.4, 0.5}) == 1);
}

TEST_CASE("polygon text serialization round-trips") {
    ConvexPolygon tri = ConvexPolygon::from_vertices({{0, 0}, {1, 0}, {0.25, 0.875}});
    std::string text = tri.to_text();
    ConvexPolygon back = ConvexPolygon::from_text(text);
    REQUIRE(back.size() == tri.size());
    for (std::size_t i = 0; i < tri.size(); ++i) {
        CHECK(back.vertices()[i] == tri.vertices()[i]);
    }
    REQUIRE_THROWS_AS(ConvexPolygon::from_text("0,0\nbogus\n1,1"), Error);
}
