#include <doctest.h>

#include <cmath>
#include <random>

#include "pouchreg/metrics.hpp"
#include "test_support.hpp"

using namespace pouchreg;

namespace {

std::vector<Point2> random_points(std::mt19937& gen, int n, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) pts.emplace_back(u(gen), u(gen));
  return pts;
}

Mask random_mask(std::mt19937& gen, int rows, int cols, double density) {
  std::bernoulli_distribution b(density);
  Mask m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = b(gen) ? 1 : 0;
  return m;
}

double ulps_apart(double a, double b) {
  return std::abs(a - b) / std::max(std::numeric_limits<double>::denorm_min(),
                                    std::nextafter(std::max(std::abs(a), std::abs(b)), INFINITY) -
                                        std::max(std::abs(a), std::abs(b)));
}

}  // namespace

TEST_CASE("rmse") {
  const Image a = testing::smooth_random_image(10, 10, 2);
  CHECK(rmse(a, a) == 0.0);
  CHECK(rmse(Image::Zero(3, 3), Image::Ones(3, 3)) == 1.0);
  Image p = Image::Zero(1, 2), q(1, 2);
  q << 0.3, 0.4;
  CHECK(rmse(p, q) == doctest::Approx(std::sqrt(0.125)).epsilon(1e-15));
  Mask left = Mask::Zero(1, 2);
  left(0, 0) = 1;
  CHECK(rmse(p, q, left) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("rmse triangle inequality") {
  std::mt19937 gen(11);
  for (int i = 0; i < 100; ++i) {
    const Image a = Image::Random(12, 9).abs(), b = Image::Random(12, 9).abs(), c = Image::Random(12, 9).abs();
    const Mask region = random_mask(gen, 12, 9, 0.6);
    if (foreground_count(region) == 0) continue;
    CHECK(rmse(a, c, region) <= rmse(a, b, region) + rmse(b, c, region) + 1e-15);
  }
}

TEST_CASE("hausdorff examples") {
  const std::vector<Point2> a{{0, 0}};
  const std::vector<Point2> b{{3, 4}};
  CHECK(hausdorff(a, b) == 5.0);
  CHECK(hausdorff(a, a) == 0.0);
  const std::vector<Point2> line{{0, 0}, {1, 0}, {2, 0}, {10, 0}};
  const std::vector<Point2> pair{{0, 0}, {2, 0}};
  CHECK(directed_hausdorff(pair, line) == 0.0);
  CHECK(directed_hausdorff(line, pair) == 8.0);
  CHECK(hausdorff(line, pair) == 8.0);
  CHECK_THROWS_AS(hausdorff(std::vector<Point2>{}, b), std::invalid_argument);
}

TEST_CASE("hausdorff matches brute force") {
  std::mt19937 gen(5);
  std::uniform_int_distribution<int> size(1, 200);
  for (int trial = 0; trial < 60; ++trial) {
    const double spread = trial % 3 == 0 ? 1e3 : (trial % 3 == 1 ? 5.0 : 0.01);
    const auto a = random_points(gen, size(gen), spread);
    auto b = random_points(gen, size(gen), spread);
    if (trial % 5 == 0) {
      for (auto& p : b) p += Point2(3 * spread, 0);  // far apart
    }
    const double oracle = testing::brute_force_hausdorff(a, b);
    CHECK(std::abs(hausdorff(a, b) - oracle) <= 1e-12 * std::max(1.0, oracle));
    CHECK(hausdorff(a, b) == hausdorff(b, a));
  }
}

TEST_CASE("hausdorff zero iff equal as sets") {
  std::mt19937 gen(8);
  auto a = random_points(gen, 50, 20);
  auto b = a;
  std::shuffle(b.begin(), b.end(), gen);
  b.push_back(a.front());
  CHECK(hausdorff(a, b) == 0.0);
  b.back() += Point2(1e-9, 0);
  CHECK(hausdorff(a, b) > 0.0);
}

TEST_CASE("overlap examples") {
  const Mask a = testing::disk_mask(30, 30, {15, 15}, 8);
  Overlap o = overlap(a, a);
  CHECK(o.iou == 1.0);
  CHECK(o.f1 == 1.0);
  CHECK_FALSE(o.vacuous);

  Mask left = Mask::Zero(10, 20), right = Mask::Zero(10, 20);
  left.leftCols(10).setOnes();
  right.rightCols(10).setOnes();
  o = overlap(left, right);
  CHECK(o.iou == 0.0);
  CHECK(o.f1 == 0.0);

  // |a| = |b| = 100, |a n b| = 50.
  Mask p = Mask::Zero(10, 15), q = Mask::Zero(10, 15);
  p.leftCols(10).setOnes();
  q.rightCols(10).setOnes();
  o = overlap(p, q);
  CHECK(o.iou == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(o.f1 == 0.5);

  o = overlap(Mask::Zero(4, 4), Mask::Zero(4, 4));
  CHECK(o.vacuous);
  CHECK(o.iou == 1.0);
  CHECK(o.f1 == 1.0);
  CHECK_THROWS_AS(overlap(p, Mask::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("f1 and iou identity on random pairs") {
  std::mt19937 gen(21);
  std::uniform_real_distribution<double> d(0.05, 0.95);
  for (int i = 0; i < 100; ++i) {
    const Mask a = random_mask(gen, 17, 23, d(gen));
    const Mask b = random_mask(gen, 17, 23, d(gen));
    const Overlap o = overlap(a, b);
    const long inter = ((a != 0) && (b != 0)).count();
    const long uni = ((a != 0) || (b != 0)).count();
    // Exact in integers: |a| + |b| = |a u b| + |a n b|.
    CHECK(foreground_count(a) + foreground_count(b) == uni + inter);
    CHECK(ulps_apart(o.f1, 2 * o.iou / (1 + o.iou)) <= 4.0);
    CHECK(0.0 <= o.iou);
    CHECK(o.iou <= o.f1);
    CHECK(o.f1 <= 1.0);
  }
}

TEST_CASE("boundary_points") {
  Mask m = Mask::Zero(7, 7);
  m.block(1, 1, 5, 5).setOnes();
  const auto pts = boundary_points(m);
  CHECK(pts.size() == 16);
  for (const Point2& p : pts) {
    CHECK((p.x() == 1 || p.x() == 5 || p.y() == 1 || p.y() == 5));
  }
  CHECK(boundary_points(Mask::Ones(3, 4)).size() == 10);
  CHECK(boundary_points(Mask::Zero(3, 3)).empty());
}

TEST_CASE("mean_std") {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  const MeanStd s = mean_std(v);
  CHECK(s.mean == 5.0);
  CHECK(s.std == 2.0);
  const MeanStd one = mean_std(std::vector<double>{3.5});
  CHECK(one.mean == 3.5);
  CHECK(one.std == 0.0);
}
