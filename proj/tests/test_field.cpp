#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "gpcover/field.hpp"
#include "gpcover/geometry.hpp"
#include "gpcover/grid.hpp"
#include "gpcover/kernel.hpp"
#include "oracles.hpp"

using namespace gpcover;

namespace {

const GaussianKernel kKernel(0.02);

ConvexPolygon unit_square() {
    return ConvexPolygon::rectangle({0.0, 0.0}, {1.0, 1.0});
}

struct RandomData {
    std::vector<Point2> locs;
    std::vector<double> values;
};

RandomData sample_data(std::size_t count, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 3.0);
    RandomData d;
    for (std::size_t i = 0; i < count; ++i) {
        d.locs.push_back({u(gen), u(gen)});
        d.values.push_back(g(gen));
    }
    return d;
}

}  // namespace

TEST_CASE("kernel basics") {
    CHECK(kKernel({0.3, 0.4}, {0.3, 0.4}) == 1.0);
    CHECK(kKernel({0.0, 0.0}, {0.1, 0.0}) == Catch::Approx(std::exp(-0.5)).margin(1e-15));
    // symmetry and monotone radial decay
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        Point2 a{u(gen), u(gen)}, b{u(gen), u(gen)}, c{u(gen), u(gen)}, d{u(gen), u(gen)};
        CHECK(kKernel(a, b) == kKernel(b, a));
        if (distance(a, b) <= distance(c, d)) {
            CHECK(kKernel(a, b) >= kKernel(c, d));
        }
    }
    CHECK_THROWS_AS(GaussianKernel(0.0), Error);
    CHECK_THROWS_AS(GaussianKernel(0.02, -1.0), Error);
}

TEST_CASE("empty model returns the prior") {
    FieldModel<GaussianKernel> model(kKernel, 0.1);
    CHECK(model.posterior_mean({0.3, 0.7}) == 0.0);
    CHECK(model.posterior_variance({0.3, 0.7}) == 1.0);
    Point2 g = model.variance_gradient({0.3, 0.7});
    CHECK(g.x == 0.0);
    CHECK(g.y == 0.0);

    auto [vmax, where] = max_variance_on_grid(model, unit_square(), 0.05);
    CHECK(vmax == 1.0);
    // all nodes tie at the prior variance; lowest lexicographic node wins
    CHECK(where.x == Catch::Approx(0.025).margin(1e-15));
    CHECK(where.y == Catch::Approx(0.025).margin(1e-15));
}

TEST_CASE("single measurement closed forms") {
    FieldModel<GaussianKernel> model(kKernel, 0.1);
    const Point2 x0{0.4, 0.6};
    model.add_measurements(std::vector<Point2>{x0}, std::vector<double>{2.0});

    REQUIRE(model.size() == 1);
    CHECK(model.coeffs()(0) == Catch::Approx(2.0 / 1.1).margin(1e-14));
    CHECK(model.posterior_mean(x0) == Catch::Approx(2.0 / 1.1).margin(1e-14));
    CHECK(model.posterior_variance(x0) ==
          Catch::Approx(0.09090909090909091).margin(1e-13));
}

TEST_CASE("posterior matches the dense-solve oracle") {
    auto [locs, values] = sample_data(10, 11);
    FieldModel<GaussianKernel> model(kKernel, 0.1);
    model.add_measurements(locs, values);
    oracle::DenseGP ref(kKernel, 0.1, locs, values);

    for (Eigen::Index i = 0; i < 10; ++i) {
        CHECK(model.coeffs()(i) == Catch::Approx(ref.coeffs()(i)).margin(1e-8));
    }
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int q = 0; q < 20; ++q) {
        Point2 x{u(gen), u(gen)};
        CHECK(model.posterior_mean(x) == Catch::Approx(ref.mean(x)).margin(1e-8));
        double v = model.posterior_variance(x);
        CHECK(v == Catch::Approx(ref.variance(x)).margin(1e-8));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    // the 5-point coefficient check with fixed distinct locations
    std::vector<Point2> five{{0.1, 0.1}, {0.9, 0.2}, {0.5, 0.5}, {0.2, 0.8}, {0.7, 0.7}};
    std::vector<double> fivey{1.0, -2.0, 0.5, 3.0, -1.5};
    FieldModel<GaussianKernel> m5(kKernel, 0.1);
    m5.add_measurements(five, fivey);
    oracle::DenseGP ref5(kKernel, 0.1, five, fivey);
    for (Eigen::Index i = 0; i < 5; ++i) {
        CHECK(m5.coeffs()(i) == Catch::Approx(ref5.coeffs()(i)).margin(1e-8));
    }
}

TEST_CASE("incremental update equals batch refactorization") {
    auto [locs, values] = sample_data(25, 23);

    FieldModel<GaussianKernel> batch(kKernel, 0.1);
    batch.add_measurements(locs, values);

    FieldModel<GaussianKernel> incr(kKernel, 0.1);
    std::size_t at = 0;
    std::mt19937 gen(7);
    while (at < locs.size()) {
        std::size_t block = 1 + gen() % 7;
        block = std::min(block, locs.size() - at);
        incr.add_measurements(std::span(locs).subspan(at, block),
                              std::span(values).subspan(at, block));
        at += block;
    }

    REQUIRE(incr.size() == batch.size());
    for (Eigen::Index i = 0; i < 25; ++i) {
        CHECK(incr.coeffs()(i) == Catch::Approx(batch.coeffs()(i)).margin(1e-8));
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int q = 0; q < 10; ++q) {
        Point2 x{u(gen), u(gen)};
        CHECK(incr.posterior_mean(x) == Catch::Approx(batch.posterior_mean(x)).margin(1e-8));
        CHECK(incr.posterior_variance(x) ==
              Catch::Approx(batch.posterior_variance(x)).margin(1e-8));
    }
}

TEST_CASE("variance is non-increasing in data and order-exchangeable") {
    auto [locs, values] = sample_data(15, 31);
    Grid grid = make_grid(unit_square(), 0.1);

    FieldModel<GaussianKernel> model(kKernel, 0.1);
    std::vector<double> prev(grid.nodes.size(), 1.0);
    for (std::size_t k = 0; k < locs.size(); ++k) {
        model.add_measurements(std::span(locs).subspan(k, 1),
                               std::span(values).subspan(k, 1));
        for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
            double v = model.posterior_variance(grid.nodes[i].p);
            CHECK(v <= prev[i] + 1e-10);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            prev[i] = v;
        }
    }

    // permuted arrival order
    std::vector<std::size_t> perm(locs.size());
    std::iota(perm.begin(), perm.end(), 0u);
    std::mt19937 gen(97);
    std::shuffle(perm.begin(), perm.end(), gen);
    FieldModel<GaussianKernel> shuffled(kKernel, 0.1);
    for (std::size_t k : perm) {
        shuffled.add_measurements(std::span(locs).subspan(k, 1),
                                  std::span(values).subspan(k, 1));
    }
    for (const GridNode& node : grid.nodes) {
        CHECK(shuffled.posterior_mean(node.p) ==
              Catch::Approx(model.posterior_mean(node.p)).margin(1e-10));
        CHECK(shuffled.posterior_variance(node.p) ==
              Catch::Approx(model.posterior_variance(node.p)).margin(1e-10));
    }
}

TEST_CASE("variance gradient: symmetry and finite differences") {
    SECTION("symmetric measurement pair zeroes the axial component") {
        FieldModel<GaussianKernel> model(kKernel, 0.1);
        std::vector<Point2> locs{{0.3, 0.5}, {0.7, 0.5}};
        std::vector<double> vals{1.0, -1.0};
        model.add_measurements(locs, vals);
        Point2 g = model.variance_gradient({0.5, 0.5});
        CHECK(std::abs(g.x) < 1e-12);
    }

    SECTION("matches central finite differences on random instances") {
        auto [locs, values] = sample_data(12, 41);
        FieldModel<GaussianKernel> model(kKernel, 0.1);
        model.add_measurements(locs, values);
        auto v = [&](Point2 x) { return model.posterior_variance(x); };
        std::mt19937 gen(43);
        std::uniform_real_distribution<double> u(0.05, 0.95);
        for (int q = 0; q < 50; ++q) {
            Point2 x{u(gen), u(gen)};
            Point2 analytic = model.variance_gradient(x);
            Point2 fd = oracle::fd_gradient(v, x, 1e-5);
            CHECK(analytic.x == Catch::Approx(fd.x).margin(1e-4));
            CHECK(analytic.y == Catch::Approx(fd.y).margin(1e-4));
        }
    }
}

TEST_CASE("max_variance_on_grid scans the domain grid") {
    SECTION("dense coverage pulls the maximum below a tenth of the prior") {
        Grid grid = make_grid(unit_square(), 0.1);
        std::vector<Point2> locs;
        std::vector<double> values;
        for (const GridNode& n : grid.nodes) {
            locs.push_back(n.p);
            values.push_back(1.0);
        }
        FieldModel<GaussianKernel> model(kKernel, 0.01);
        model.add_measurements(locs, values);
        auto [vmax, where] = max_variance_on_grid(model, unit_square(), 0.1);
        CHECK(vmax < 0.1);
        CHECK(unit_square().contains(where));
    }

    SECTION("a corner measurement pushes the maximizer to the far side") {
        // longer lengthscale so the variance keeps strictly increasing with
        // distance across the whole square instead of saturating
        GaussianKernel wide(0.5);
        FieldModel<GaussianKernel> model(wide, 0.1);
        model.add_measurements(std::vector<Point2>{{0.0, 0.0}}, std::vector<double>{1.0});
        auto [vmax, where] = max_variance_on_grid(model, unit_square(), 0.05);
        CHECK(distance(where, {0.0, 0.0}) > std::sqrt(2.0) / 2.0);
        CHECK(vmax < 1.0);
        CHECK(vmax > 0.9);
    }

    SECTION("no node inside the domain") {
        ConvexPolygon sliver =
            ConvexPolygon::from_vertices({{0, 0}, {0.01, 0}, {0, 0.01}});
        FieldModel<GaussianKernel> model(kKernel, 0.1);
        CHECK_THROWS_AS(max_variance_on_grid(model, sliver, 0.05), EmptyGrid);
    }
}

TEST_CASE("grid tracker agrees with direct queries") {
    Grid grid = make_grid(unit_square(), 0.1);
    FieldModel<GaussianKernel> model(kKernel, 0.1);
    GridPosterior tracker(model, grid.nodes);

    auto [locs, values] = sample_data(40, 53);
    std::size_t at = 0;
    std::mt19937 gen(59);
    while (at < locs.size()) {
        std::size_t block = 1 + gen() % 5;
        block = std::min(block, locs.size() - at);
        model.add_measurements(std::span(locs).subspan(at, block),
                               std::span(values).subspan(at, block));
        at += block;
        tracker.sync(model);

        for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
            CHECK(tracker.mean(i) ==
                  Catch::Approx(model.posterior_mean(grid.nodes[i].p)).margin(1e-10));
            CHECK(tracker.variance(i) ==
                  Catch::Approx(model.posterior_variance(grid.nodes[i].p)).margin(1e-10));
        }
        auto [tv, tw] = tracker.max_variance();
        auto [sv, sw] = max_variance_on_grid(model, unit_square(), 0.1);
        CHECK(tv == Catch::Approx(sv).margin(1e-10));
        CHECK(distance(tw, sw) < 1e-12);
    }
}

TEST_CASE("tikhonov gap certifies the minimizer") {
    SECTION("single measurement") {
        FieldModel<GaussianKernel> model(kKernel, 0.1);
        model.add_measurements(std::vector<Point2>{{0.5, 0.5}}, std::vector<double>{1.5});
        CHECK(tikhonov_gap(model, 50, 1) <= 1e-12);
    }

    SECTION("twenty measurements, one hundred probes") {
        auto [locs, values] = sample_data(20, 61);
        FieldModel<GaussianKernel> model(kKernel, 0.1);
        model.add_measurements(locs, values);
        CHECK(tikhonov_gap(model, 100, 2) <= 1e-10);
    }

    SECTION("zero probes mean the zero perturbation") {
        FieldModel<GaussianKernel> model(kKernel, 0.1);
        model.add_measurements(std::vector<Point2>{{0.5, 0.5}}, std::vector<double>{1.5});
        CHECK(tikhonov_gap(model, 0, 3) == 0.0);
    }

    SECTION("oracle route: J from its definition") {
        auto [locs, values] = sample_data(20, 67);
        FieldModel<GaussianKernel> model(kKernel, 0.1);
        model.add_measurements(locs, values);
        oracle::DenseGP ref(kKernel, 0.1, locs, values);

        const double J_hat = ref.J(ref.coeffs());
        std::mt19937 gen(71);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int probe = 0; probe < 100; ++probe) {
            Eigen::VectorXd d(20);
            for (Eigen::Index i = 0; i < 20; ++i) d(i) = g(gen);
            const double norm_sq = d.dot(ref.gram() * d);
            REQUIRE(norm_sq > 0.0);
            d *= 1e-3 / std::sqrt(norm_sq);
            CHECK(J_hat - ref.J(ref.coeffs() + d) <= 1e-10);
        }
    }

    SECTION("empty archive is rejected") {
        FieldModel<GaussianKernel> model(kKernel, 0.1);
        CHECK_THROWS_AS(tikhonov_gap(model, 10, 4), Error);
    }
}

TEST_CASE("model guards its preconditions") {
    CHECK_THROWS_AS(FieldModel<GaussianKernel>(kKernel, 0.0), Error);
    CHECK_THROWS_AS(FieldModel<GaussianKernel>(kKernel, -0.5), Error);

    FieldModel<GaussianKernel> model(kKernel, 0.1, 10);
    auto [locs, values] = sample_data(11, 73);
    CHECK_THROWS_AS(model.add_measurements(locs, values), Error);

    std::vector<Point2> one{{0.5, 0.5}};
    std::vector<double> two{1.0, 2.0};
    CHECK_THROWS_AS(model.add_measurements(one, two), Error);

    std::vector<Point2> bad{{std::nan(""), 0.5}};
    std::vector<double> y1{1.0};
    CHECK_THROWS_AS(model.add_measurements(bad, y1), Error);

    // a duplicated location with vanishing noise drives the update pivot
    // to zero in floating point
    FieldModel<GaussianKernel> fragile(kKernel, 1e-30);
    std::vector<Point2> dup{{0.5, 0.5}, {0.5, 0.5}};
    std::vector<double> dv{1.0, 1.0};
    CHECK_THROWS_AS(fragile.add_measurements(dup, dv), NumericalBreakdown);
}
