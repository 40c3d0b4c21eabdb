#include <doctest.h>

#include <numbers>

#include "pouchreg/rigid.hpp"
#include "test_support.hpp"

using namespace pouchreg;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const Mask& ellipse() {
  static const Mask m = testing::ellipse_mask(96, 96, {47.3, 49.1}, 26, 14, 0.4);
  return m;
}

// A source mask whose backward-warp optimum about the reference centroid is `want`.
Mask source_for(const Mask& ref, double theta, double tx, double ty) {
  const Point2 c = mask_centroid(ref);
  const RigidParams want{theta, tx, ty, c.x(), c.y()};
  // src(want(p)) = ref(p)  <=>  src(q) = ref(want^{-1}(q)).
  const double ct = std::cos(theta), st = std::sin(theta);
  return warp_mask(ref, [&](const Point2& q) {
    const Point2 d = q - c - Point2(tx, ty);
    return Point2(ct * d.x() + st * d.y() + c.x(), -st * d.x() + ct * d.y() + c.y());
  });
}

}  // namespace

TEST_CASE("apply_rigid") {
  CHECK(apply_rigid(RigidParams::identity(), Point2(2.5, -1)) == Point2(2.5, -1));
  const Point2 q = apply_rigid({std::numbers::pi / 2, 0, 0, 0, 0}, Point2(1, 0));
  CHECK(std::abs(q.x()) < 1e-15);
  CHECK(q.y() == doctest::Approx(1.0));
  CHECK(apply_rigid({0, 3, -2, 0, 0}, Point2(5, 5)) == Point2(8, 3));
  const Point2 about = apply_rigid({std::numbers::pi, 0, 0, 10, 10}, Point2(12, 10));
  CHECK(about.x() == doctest::Approx(8.0));
  CHECK(about.y() == doctest::Approx(10.0));
}

TEST_CASE("normalize_angle maps into (-pi, pi]") {
  constexpr double pi = std::numbers::pi;
  CHECK(normalize_angle(pi) == doctest::Approx(pi));
  CHECK(normalize_angle(-pi) == doctest::Approx(pi));
  CHECK(normalize_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
  CHECK(normalize_angle(0.25 + 4 * pi) == doctest::Approx(0.25));
  for (double t = -20; t < 20; t += 0.37) {
    const double n = normalize_angle(t);
    CHECK(n > -pi);
    CHECK(n <= pi);
    CHECK(std::abs(std::remainder(n - t, 2 * pi)) < 1e-9);
  }
}

TEST_CASE("RigidConfig validation") {
  RigidConfig c;
  CHECK_NOTHROW(c.validate());
  c.min_step = 3.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.relaxation = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("register_rigid: identical masks stay at identity") {
  const Mask& ref = ellipse();
  const RigidResult r = register_rigid(ref, ref, RigidParams::identity());
  CHECK(std::abs(r.params.theta) < 1e-3);
  CHECK(std::abs(r.params.tx) < 0.1);
  CHECK(std::abs(r.params.ty) < 0.1);
  CHECK(r.cost <= r.initial_cost);
  const Point2 c = mask_centroid(ref);
  CHECK(r.params.cx == c.x());
  CHECK(r.params.cy == c.y());
}

TEST_CASE("register_rigid: integer translation") {
  const Mask& ref = ellipse();
  const Mask src = warp_mask(ref, [](const Point2& p) { return Point2(p.x() + 4.0, p.y()); });
  const RigidResult r = register_rigid(ref, src, RigidParams::identity());
  CHECK(std::abs(r.params.tx + 4.0) <= 0.5);
  CHECK(std::abs(r.params.ty) <= 0.5);
  CHECK(r.cost <= r.initial_cost);
}

TEST_CASE("register_rigid: rotation and translation") {
  const Mask& ref = ellipse();
  for (const auto& [deg, tx, ty] : std::vector<std::tuple<double, double, double>>{
           {12.0, 0.0, 0.0}, {-18.0, 3.0, -2.0}, {6.0, -5.5, 4.0}}) {
    const Mask src = source_for(ref, deg * kDeg, tx, ty);
    const RigidResult r = register_rigid(ref, src, RigidParams::identity());
    CHECK(std::abs(r.params.theta / kDeg - deg) <= 1.0);
    CHECK(std::abs(r.params.tx - tx) <= 0.5);
    CHECK(std::abs(r.params.ty - ty) <= 0.5);
  }
}

TEST_CASE("register_rigid: warm start near a half turn") {
  const Mask& ref = ellipse();
  const Mask src = source_for(ref, 170 * kDeg, 0, 0);
  const Point2 c = mask_centroid(ref);
  const RigidResult cold = register_rigid(ref, src, RigidParams::identity());
  CHECK(cold.cost <= cold.initial_cost);
  const RigidResult warm = register_rigid(ref, src, RigidParams{160 * kDeg, 0, 0, c.x(), c.y()});
  CHECK(std::abs(normalize_angle(warm.params.theta - 170 * kDeg)) / kDeg <= 5.0);
}

TEST_CASE("register_rigid: shifting both masks leaves the relative transform") {
  const Mask& ref = ellipse();
  const Mask src = source_for(ref, 8 * kDeg, 2, -1);
  auto shift = [](const Mask& m) {
    return warp_mask(m, [](const Point2& p) { return Point2(p.x() - 3.0, p.y() - 2.0); });
  };
  const RigidResult a = register_rigid(ref, src, RigidParams::identity());
  const RigidResult b = register_rigid(shift(ref), shift(src), RigidParams::identity());
  CHECK(std::abs(a.params.tx - b.params.tx) <= 0.2);
  CHECK(std::abs(a.params.ty - b.params.ty) <= 0.2);
  CHECK(std::abs(a.params.theta - b.params.theta) <= 2e-3);
}

TEST_CASE("register_rigid: errors") {
  const Mask& ref = ellipse();
  CHECK_THROWS_AS(register_rigid(ref, Mask::Zero(96, 96), RigidParams::identity()), EmptyMaskError);
  CHECK_THROWS_AS(register_rigid(Mask::Zero(96, 96), ref, RigidParams::identity()), EmptyMaskError);
  RigidConfig bad;
  bad.max_iters = 0;
  CHECK_THROWS_AS(register_rigid(ref, ref, RigidParams::identity(), bad), std::invalid_argument);
}
