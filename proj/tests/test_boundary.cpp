#include <doctest.h>

#include <random>

#include "pouchreg/boundary.hpp"
#include "pouchreg/metrics.hpp"
#include "test_support.hpp"

using namespace pouchreg;

namespace {

// Every feasible closed path in lexicographic order; keeps the first minimum.
struct Exhaustive {
  const Eigen::ArrayXXd& w;
  int jump;
  std::vector<int> cur, best;
  double best_cost = INFINITY;

  void run(int col, double acc) {
    const int cols = int(w.cols());
    if (col == cols) {
      if (std::abs(cur.back() - cur.front()) <= jump && acc < best_cost) {
        best_cost = acc;
        best = cur;
      }
      return;
    }
    for (int r = 0; r < w.rows(); ++r) {
      if (col > 0 && std::abs(r - cur.back()) > jump) continue;
      cur.push_back(r);
      run(col + 1, acc + w(r, col));
      cur.pop_back();
    }
  }
};

Exhaustive enumerate(const Eigen::ArrayXXd& w, int jump) {
  Exhaustive e{w, jump, {}, {}};
  e.run(0, 0.0);
  return e;
}

bool feasible(const std::vector<int>& rows, int jump) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (std::abs(rows[i] - rows[(i + 1) % rows.size()]) > jump) return false;
  }
  return true;
}

Image disk_image(int size, Point2 c, double r) {
  Image img(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) img(y, x) = std::hypot(x - c.x(), y - c.y()) <= r ? 0.8 : 0.2;
  }
  return img;
}

std::vector<Point2> circle_points(Point2 c, double r, int n) {
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) {
    const double a = 2 * std::numbers::pi * i / n;
    pts.emplace_back(c.x() + r * std::cos(a), c.y() + r * std::sin(a));
  }
  return pts;
}

}  // namespace

TEST_CASE("min_closed_path equals exhaustive enumeration") {
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> u(-1.0, 0.0);
  for (const auto& [rows, cols, jump] : std::vector<std::tuple<int, int, int>>{{6, 8, 2}, {10, 12, 1}, {5, 7, 1}, {7, 9, 3}}) {
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::ArrayXXd w(rows, cols);
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(gen);
      const ClosedPath p = min_closed_path(w, jump);
      const Exhaustive e = enumerate(w, jump);
      CHECK(p.cost == doctest::Approx(e.best_cost).epsilon(1e-12));
      CHECK(p.rows == e.best);
      CHECK(feasible(p.rows, jump));
    }
  }
}

TEST_CASE("min_closed_path tie-breaking") {
  SUBCASE("all ties pick the innermost path") {
    const ClosedPath p = min_closed_path(Eigen::ArrayXXd::Zero(6, 10), 2);
    CHECK(p.rows == std::vector<int>(10, 0));
  }
  SUBCASE("integer weights with many equal optima") {
    std::mt19937 gen(3);
    std::uniform_int_distribution<int> u(-2, 0);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::ArrayXXd w(5, 8);
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(gen);
      const ClosedPath p = min_closed_path(w, 1);
      const Exhaustive e = enumerate(w, 1);
      CHECK(p.cost == e.best_cost);
      CHECK(p.rows == e.best);
    }
  }
  SUBCASE("closure binds") {
    // A cheap ramp that cannot close is beaten by a flat path.
    Eigen::ArrayXXd w = Eigen::ArrayXXd::Zero(8, 6);
    for (int c = 0; c < 6; ++c) w(c, c) = -1.0;
    const ClosedPath p = min_closed_path(w, 1);
    CHECK(feasible(p.rows, 1));
    CHECK(p.cost == enumerate(w, 1).best_cost);
  }
}

TEST_CASE("RefineConfig validation") {
  RefineConfig c;
  CHECK_NOTHROW(c.validate());
  c.radial_samples = 7;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.angular_samples = 15;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.max_radial_jump = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.band_fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("rasterize_polygon") {
  const Polygon square{{2, 2}, {6, 2}, {6, 5}, {2, 5}};
  const Mask m = rasterize_polygon(square, 8, 8);
  // Centres strictly inside (3..5, 3..4) plus the even-odd half-open edges.
  CHECK(foreground_count(m) >= 6);
  CHECK(foreground_count(m) <= 20);
  CHECK(m(3, 4) == 1);
  CHECK(m(0, 0) == 0);
  CHECK(m(7, 7) == 0);
  const Polygon tri{{0.5, 0.5}, {20.5, 0.5}, {0.5, 20.5}};
  const Mask t = rasterize_polygon(tri, 24, 24);
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < 24; ++x) {
      if (x + y < 19 && x >= 1 && y >= 1) CHECK(t(y, x) == 1);
      if (x + y > 22) CHECK(t(y, x) == 0);
    }
  }
}

TEST_CASE("refine_boundary: eroded disk snaps to the edge") {
  const Point2 c(40.3, 39.6);
  const Image img = disk_image(80, c, 20);
  const Mask truth = testing::disk_mask(80, 80, c, 20);
  const Mask initial = erode(truth, 3);
  const RefineResult r = refine_boundary(img, initial);
  REQUIRE(r.polygon.size() == 360);
  CHECK(testing::brute_force_hausdorff(r.polygon, circle_points(c, 20, 720)) <= 1.5);
  CHECK(iou(r.mask, truth) >= 0.9);
  CHECK_FALSE(r.band_clipped);
}

TEST_CASE("refine_boundary: constant image keeps the innermost band edge") {
  const Image img = Image::Constant(64, 64, 0.5);
  const Mask initial = testing::disk_mask(64, 64, {32, 32}, 14);
  RefineConfig cfg;
  const RefineResult r = refine_boundary(img, initial, cfg);
  for (std::size_t i = 0; i < r.radius.size(); ++i) {
    CHECK(r.radius[i] == doctest::Approx((1 - cfg.band_fraction) * r.initial_radius[i]));
  }
}

TEST_CASE("refine_boundary: boundary stays in the band, polygon by angle") {
  const Image img = testing::smooth_random_image(70, 70, 5, 12, 4, 10);
  const Mask initial = testing::ellipse_mask(70, 70, {35, 34}, 20, 14, 0.5);
  RefineConfig cfg;
  cfg.angular_samples = 90;
  const RefineResult r = refine_boundary(img, initial, cfg);
  REQUIRE(r.radius.size() == 90);
  for (std::size_t i = 0; i < r.radius.size(); ++i) {
    CHECK(r.radius[i] >= (1 - cfg.band_fraction) * r.initial_radius[i] - 1e-9);
    CHECK(r.radius[i] <= (1 + cfg.band_fraction) * r.initial_radius[i] + 1e-9);
    const double a = 2 * std::numbers::pi * double(i) / 90.0;
    const Point2 expect = r.centre + r.radius[i] * Point2(std::cos(a), std::sin(a));
    CHECK((r.polygon[i] - expect).norm() < 1e-9);
  }
}

TEST_CASE("refine_boundary: a correct ellipse survives") {
  const Mask truth = testing::ellipse_mask(90, 90, {45, 44}, 28, 18, 0.3);
  Image img = truth.cast<double>() * 0.6 + 0.2;
  const RefineResult r = refine_boundary(img, truth);
  CHECK(iou(r.mask, truth) >= 0.95);
}

TEST_CASE("refine_boundary: errors") {
  const Image img = Image::Constant(32, 32, 0.5);
  CHECK_THROWS_AS(refine_boundary(img, Mask::Zero(32, 32)), EmptyMaskError);
  CHECK_THROWS_AS(refine_boundary(img, testing::disk_mask(20, 20, {10, 10}, 4)), std::invalid_argument);
  const RefineResult edge = refine_boundary(img, testing::disk_mask(32, 32, {4, 16}, 6));
  CHECK(edge.band_clipped);
}
