#include <doctest.h>

#include <random>

#include "pouchreg/nonrigid.hpp"
#include "test_support.hpp"

using namespace pouchreg;

namespace {

// Plain bilinear lookup written out independently of the library's sampler.
bool lookup(const Image& img, double x, double y, double& out) {
  if (x < 0 || y < 0 || x > img.cols() - 1 || y > img.rows() - 1) return false;
  const int x0 = std::min(int(x), int(img.cols()) - 2), y0 = std::min(int(y), int(img.rows()) - 2);
  const double fx = x - x0, fy = y - y0;
  out = (1 - fx) * (1 - fy) * img(y0, x0) + fx * (1 - fy) * img(y0, x0 + 1) + (1 - fx) * fy * img(y0 + 1, x0) +
        fx * fy * img(y0 + 1, x0 + 1);
  return true;
}

double oracle_ssd(const Image& ref, const Image& src, const Lattice& lat, const Mask& region) {
  double acc = 0.0;
  int n = 0;
  for (int y = 0; y < ref.rows(); ++y) {
    for (int x = 0; x < ref.cols(); ++x) {
      if (!region(y, x)) continue;
      const Eigen::Vector2d d = testing::brute_force_displacement(lat, x, y);
      double v;
      if (!lookup(src, x + d.x(), y + d.y(), v)) continue;
      acc += (v - ref(y, x)) * (v - ref(y, x));
      ++n;
    }
  }
  return acc / n;
}

TransformChain single(const Lattice& lat) {
  TransformChain c;
  c.levels.push_back(lat);
  return c;
}

}  // namespace

TEST_CASE("ssd") {
  const Image a = testing::smooth_random_image(8, 8, 1);
  CHECK(ssd(a, a) == 0.0);
  CHECK(ssd(Image::Zero(4, 5), Image::Ones(4, 5)) == 1.0);
  Image p(1, 2), q(1, 2);
  p << 0.0, 0.5;
  q << 0.5, 0.5;
  CHECK(ssd(p, q) == 0.125);

  Mask half = Mask::Zero(1, 2);
  half(0, 1) = 1;
  CHECK(ssd(p, q, half) == 0.0);
  Mask valid = Mask::Ones(1, 2);
  valid(0, 1) = 0;
  CHECK(ssd(p, q, Mask::Ones(1, 2), &valid) == 0.25);

  CHECK_THROWS_AS(ssd(p, Image::Zero(2, 2)), std::invalid_argument);
  CHECK_THROWS_AS(ssd(p, q, Mask::Zero(1, 2)), std::invalid_argument);
}

TEST_CASE("energy") {
  const Image ref = testing::smooth_random_image(40, 40, 3);
  const RoiRect roi{6, 34, 6, 34};
  const Mask region = roi_region(roi, 40, 40);
  EnergyConfig cfg;

  SUBCASE("zero lattice on identical images") {
    CHECK(energy(ref, ref, single(Lattice(roi, 2, 2)), region, cfg) == 0.0);
  }
  SUBCASE("zero lattice is pure SSD whatever the weight") {
    const Image src = testing::smooth_random_image(40, 40, 4);
    cfg.reg_weight = 123.0;
    CHECK(energy(ref, src, single(Lattice(roi, 2, 2)), region, cfg) == doctest::Approx(ssd(ref, src, region)));
  }
  SUBCASE("one pushed control point: hand S term plus direct-sum warp") {
    const Image src = testing::smooth_random_image(40, 40, 5);
    Lattice lat(roi, 2, 2);
    REQUIRE(lat.control_count() == 25);
    lat.dx()(2, 2) = 2.0;
    cfg.reg_weight = 0.1;
    const double expect = oracle_ssd(ref, src, lat, region) + 0.1 * (4.0 / 25.0);
    CHECK(energy(ref, src, single(lat), region, cfg) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("grad_energy") {
  const RoiRect roi{7, 25, 7, 25};
  const Mask region = roi_region(roi, 32, 32);

  SUBCASE("zero residual gives a zero SSD gradient") {
    const Image ref = testing::smooth_random_image(32, 32, 8);
    const LatticeGradient g = grad_energy(ref, ref, single(Lattice(roi, 3, 3)), region, EnergyConfig{});
    CHECK(g.dx.abs().maxCoeff() == 0.0);
    CHECK(g.dy.abs().maxCoeff() == 0.0);
  }

  SUBCASE("finite differences on random smooth instances") {
    for (unsigned seed = 0; seed < 5; ++seed) {
      const Image ref = testing::smooth_random_image(32, 32, 100 + seed);
      const Image src = testing::smooth_random_image(32, 32, 200 + seed);
      Lattice lat = testing::random_lattice(roi, 3, 3, 1.0, 300 + seed);
      EnergyConfig cfg;
      cfg.reg_weight = seed % 2 ? 0.0 : 0.05;
      TransformChain chain = single(lat);
      const LatticeGradient g = grad_energy(ref, src, chain, region, cfg);
      // Small h keeps the stencil clear of bilinear cell boundaries.
      const double h = 1e-6;
      for (int r = 0; r < lat.n() + 3; ++r) {
        for (int c = 0; c < lat.m() + 3; ++c) {
          for (int comp = 0; comp < 2; ++comp) {
            auto& grid = comp == 0 ? chain.levels[0].dx() : chain.levels[0].dy();
            const double keep = grid(r, c);
            grid(r, c) = keep + h;
            const double ep = energy(ref, src, chain, region, cfg);
            grid(r, c) = keep - h;
            const double em = energy(ref, src, chain, region, cfg);
            grid(r, c) = keep;
            const double fd = (ep - em) / (2 * h);
            const double an = comp == 0 ? g.dx(r, c) : g.dy(r, c);
            CHECK(std::abs(an - fd) <= 1e-5 * std::abs(fd) + 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("optimize_level") {
  const Image ref = testing::smooth_random_image(48, 48, 12, 10, 4.0, 8.0);
  const RoiRect roi{8, 40, 8, 40};
  const Mask region = roi_region(roi, 48, 48);

  SUBCASE("identical images") {
    EnergyConfig cfg;
    const TransformChain chain = single(Lattice(roi, 4, 4));
    const LevelResult res = optimize_level(ref, ref, chain, region, cfg);
    CHECK(res.final_energy <= res.initial_energy);
    CHECK(res.lattice.max_abs_displacement() < 0.5);
  }
  SUBCASE("recovers a single control-point push") {
    Lattice push(roi, 4, 4);
    push.dx()(3, 3) = 2.0;
    const Image src = warp(ref, [&](const Point2& p) {
      // src(p + f(p)) ~ ref(p): sample ref through the inverse push.
      Point2 q = p;
      for (int k = 0; k < 30; ++k) q = p - push.displace(q.x(), q.y()).d;
      return q;
    });
    EnergyConfig cfg;
    cfg.reg_weight = 0.0;
    const double initial = warped_ssd(ref, src, single(Lattice(roi, 4, 4)), region);
    REQUIRE(initial > 0.0);
    const LevelResult res = optimize_level(ref, src, single(Lattice(roi, 4, 4)), region, cfg);
    CHECK(warped_ssd(ref, src, single(res.lattice), region) <= 0.25 * initial);
    for (std::size_t i = 1; i < res.log.size(); ++i) CHECK(res.log[i].energy < res.log[i - 1].energy);
  }
  SUBCASE("zero budget") {
    EnergyConfig cfg;
    cfg.max_iters = 0;
    const Lattice start = testing::random_lattice(roi, 4, 4, 0.5, 2);
    const LevelResult res = optimize_level(ref, testing::smooth_random_image(48, 48, 13), single(start), region, cfg);
    CHECK(res.log.empty());
    CHECK((res.lattice.dx() == start.dx()).all());
    CHECK((res.lattice.dy() == start.dy()).all());
  }
}

TEST_CASE("roi helpers") {
  const Mask m = testing::disk_mask(50, 60, {30, 25}, 5);
  const RoiRect roi = roi_from_mask(m, 3);
  CHECK(roi == RoiRect{22, 39, 17, 34});
  CHECK(roi_from_mask(m, 100) == RoiRect{0, 60, 0, 50});
  const Mask region = roi_region(roi, 50, 60);
  CHECK(foreground_count(region) == 17 * 17);
  // Half-resolution pixel i sits at 2i + 0.5.
  const Mask half = roi_region(roi, 25, 30, 2.0, 0.5);
  CHECK(half(9, 11) == 1);
  CHECK(half(8, 10) == 0);
}

TEST_CASE("register_nonrigid") {
  const Image ref = testing::smooth_random_image(64, 64, 31, 12, 4.0, 9.0);
  const Mask mask = testing::ellipse_mask(64, 64, {32, 31}, 18, 13, 0.3);
  const RigidParams rigid = RigidParams::about(mask_centroid(mask));

  SUBCASE("identical images") {
    const TransformChain chain = register_nonrigid(ref, ref, mask, rigid, EnergyConfig{});
    CHECK(chain.levels.size() == 3);
    CHECK(std::sqrt(ssd(ref, warp(ref, chain))) < 0.01);
    for (std::size_t i = 0; i < chain.levels.size(); ++i) {
      CHECK(chain.levels[i].m() == 4 << i);
      CHECK(chain.levels[i].domain() == roi_from_mask(mask, 10));
    }
  }
  SUBCASE("single level") {
    EnergyConfig cfg;
    cfg.levels = 1;
    CHECK(register_nonrigid(ref, ref, mask, rigid, cfg).levels.size() == 1);
  }
  SUBCASE("deterministic, monotone and better than the start") {
    Lattice bend(RoiRect{10, 54, 10, 54}, 3, 3);
    bend.dx()(2, 3) = 2.5;
    bend.dy()(3, 2) = -2.0;
    const Image src = warp(ref, single(bend));
    EnergyConfig cfg;
    std::vector<IterationRecord> log;
    const TransformChain a = register_nonrigid(ref, src, mask, rigid, cfg, &log);
    const TransformChain b = register_nonrigid(ref, src, mask, rigid, cfg);
    REQUIRE(a.levels.size() == b.levels.size());
    for (std::size_t i = 0; i < a.levels.size(); ++i) {
      CHECK((a.levels[i].dx() == b.levels[i].dx()).all());
      CHECK((a.levels[i].dy() == b.levels[i].dy()).all());
    }
    const Mask region = roi_region(roi_from_mask(mask, cfg.roi_margin), 64, 64);
    double prev = warped_ssd(ref, src, TransformChain{rigid, {}}, region);
    const double start = prev;
    for (std::size_t l = 1; l <= a.levels.size(); ++l) {
      const TransformChain upto{a.rigid, {a.levels.begin(), a.levels.begin() + long(l)}};
      const double cur = warped_ssd(ref, src, upto, region);
      CHECK(cur <= prev + cfg.epsilon);
      prev = cur;
    }
    CHECK(prev <= 0.5 * start);
    CHECK_FALSE(log.empty());
    for (const IterationRecord& r : log) CHECK((r.level >= 1 && r.level <= 3));
  }
  SUBCASE("warm start from a previous solution") {
    const TransformChain first = register_nonrigid(ref, ref, mask, rigid, EnergyConfig{});
    const TransformChain again = register_nonrigid(ref, ref, mask, rigid, EnergyConfig{}, nullptr, &first.levels);
    CHECK(std::sqrt(ssd(ref, warp(ref, again))) < 0.01);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(register_nonrigid(ref, ref, Mask::Zero(64, 64), rigid, EnergyConfig{}), EmptyMaskError);
    Mask dot = Mask::Zero(64, 64);
    dot(30, 30) = 1;
    EnergyConfig cfg;
    cfg.roi_margin = 2;
    CHECK_THROWS_AS(register_nonrigid(ref, ref, dot, rigid, cfg), DegenerateRoiError);
    cfg = {};
    cfg.levels = 0;
    CHECK_THROWS_AS(register_nonrigid(ref, ref, mask, rigid, cfg), std::invalid_argument);
  }
}
