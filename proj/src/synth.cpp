/*=========================================================================
 *
 *  Copyright The pouchreg Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *         http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#include "pouchreg/synth.hpp"

#include <numbers>
#include <vector>

#include "pouchreg/nonrigid.hpp"
#include "pouchreg/rng.hpp"

namespace pouchreg {

void SynthSpec::validate() const {
  if (count < 1) throw std::invalid_argument("synth spec: count must be >= 1");
  if (elastic_grid < 1) throw std::invalid_argument("synth spec: elastic_grid must be >= 1");
  if (!(elastic_max_disp >= 0.0 && rigid_max_theta >= 0.0 && rigid_max_trans >= 0.0 && noise_sigma >= 0.0)) {
    throw std::invalid_argument("synth spec: magnitudes must be non-negative");
  }
  if (disk_count_range[0] < 0 || disk_count_range[1] < disk_count_range[0]) {
    throw std::invalid_argument("synth spec: invalid disk_count_range");
  }
  if (!(disk_radius_range[0] >= 0.0 && disk_radius_range[1] >= disk_radius_range[0])) {
    throw std::invalid_argument("synth spec: invalid disk_radius_range");
  }
}

namespace {

std::uint64_t geometric_stream(int index) { return 2 * std::uint64_t(index); }
std::uint64_t intensity_stream(int index) { return 2 * std::uint64_t(index) + 1; }

}  // namespace

GeometricSample gen_geometric(const Image& ref, const Mask& ref_mask, const SynthSpec& spec, int index) {
  spec.validate();
  CounterRng rng(spec.seed, geometric_stream(index));

  GeometricSample out;
  const Point2 centre = mask_centroid(ref_mask);
  out.truth.rigid = RigidParams::about(centre);
  out.truth.rigid.theta = rng.uniform(-spec.rigid_max_theta, spec.rigid_max_theta);
  const double t_len = spec.rigid_max_trans * std::sqrt(rng.uniform());
  const double t_dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
  out.truth.rigid.tx = t_len * std::cos(t_dir);
  out.truth.rigid.ty = t_len * std::sin(t_dir);

  const Eigen::Array4i box = mask_bbox(ref_mask);
  Lattice elastic(RoiRect{double(box(0)), double(box(2)) + 1.0, double(box(1)), double(box(3)) + 1.0},
                  spec.elastic_grid, spec.elastic_grid);
  for (Eigen::Index r = 0; r < elastic.dx().rows(); ++r) {
    for (Eigen::Index c = 0; c < elastic.dx().cols(); ++c) {
      elastic.dx()(r, c) = rng.uniform(-spec.elastic_max_disp, spec.elastic_max_disp);
      elastic.dy()(r, c) = rng.uniform(-spec.elastic_max_disp, spec.elastic_max_disp);
    }
  }
  out.truth.levels.push_back(std::move(elastic));

  out.s1 = warp(ref, out.truth);
  out.mask = warp_mask(ref_mask, out.truth);
  return out;
}

Image rescale_unit(const Image& img) {
  const double lo = img.minCoeff();
  const double hi = img.maxCoeff();
  if (!(hi > lo)) return img;
  return (img - lo) / (hi - lo);
}

Image gen_intensity(const Image& s1, const Mask& mask, const SynthSpec& spec, int index) {
  spec.validate();
  if (s1.rows() != mask.rows() || s1.cols() != mask.cols()) {
    throw std::invalid_argument("gen_intensity: image and mask dimensions differ");
  }
  CounterRng rng(spec.seed, intensity_stream(index));
  Image out = s1;

  std::vector<std::array<Eigen::Index, 2>> inside;
  for (Eigen::Index y = 0; y < mask.rows(); ++y) {
    for (Eigen::Index x = 0; x < mask.cols(); ++x) {
      if (mask(y, x)) inside.push_back({y, x});
    }
  }
  const auto disks = rng.uniform_int(spec.disk_count_range[0], spec.disk_count_range[1]);
  for (std::int64_t d = 0; d < disks && !inside.empty(); ++d) {
    const auto [cy, cx] = inside[std::size_t(rng.uniform_int(0, std::int64_t(inside.size()) - 1))];
    const double radius = rng.uniform(spec.disk_radius_range[0], spec.disk_radius_range[1]);
    const auto reach = Eigen::Index(std::ceil(radius));
    for (Eigen::Index y = std::max<Eigen::Index>(0, cy - reach); y <= std::min(mask.rows() - 1, cy + reach); ++y) {
      for (Eigen::Index x = std::max<Eigen::Index>(0, cx - reach); x <= std::min(mask.cols() - 1, cx + reach);
           ++x) {
        const double ddx = double(x - cx);
        const double ddy = double(y - cy);
        if (ddx * ddx + ddy * ddy > radius * radius || !mask(y, x)) continue;
        out(y, x) += spec.noise_sigma * rng.normal();
      }
    }
  }
  return rescale_unit(out);
}

double clean_register_eval(const Image& ref, const Image& s1, const TransformChain& recovered, const Mask& mask) {
  const WarpResult c = warp_with_validity(s1, recovered);
  return std::sqrt(ssd(ref, c.image, mask, &c.valid));
}

Phantom make_phantom(int size, std::uint64_t seed) {
  if (size < 32) throw std::invalid_argument("make_phantom: size must be >= 32");
  CounterRng rng(seed, 0xFA57ULL);
  const double n = double(size);
  const Point2 centre(0.5 * n + rng.uniform(-0.03, 0.03) * n, 0.5 * n + rng.uniform(-0.03, 0.03) * n);
  const double a = 0.31 * n;
  const double b = 0.21 * n;
  const double tilt = rng.uniform(-0.4, 0.4);

  struct Blob {
    Point2 c;
    double radius;
    double amplitude;
  };
  std::vector<Blob> blobs;
  for (int i = 0; i < 40; ++i) {
    const double rr = std::sqrt(rng.uniform());
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    blobs.push_back({centre + Point2(a * rr * std::cos(phi), b * rr * std::sin(phi)), rng.uniform(0.03, 0.07) * n,
                     rng.uniform(-0.25, 0.25)});
  }

  Phantom out{Image(size, size), Mask(size, size)};
  const double ct = std::cos(tilt);
  const double st = std::sin(tilt);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double dx = double(x) - centre.x();
      const double dy = double(y) - centre.y();
      const double u = ct * dx + st * dy;
      const double v = -st * dx + ct * dy;
      // Egg shape: the +u end is wider than the -u end.
      const double widen = 1.0 + 0.15 * std::clamp(u / a, -1.0, 1.0);
      const double rho = std::sqrt((u / a) * (u / a) + (v / (b * widen)) * (v / (b * widen)));
      const double signed_dist = (rho - 1.0) * b;  // ~pixels outside the boundary
      const double inside = 1.0 / (1.0 + std::exp(signed_dist / 0.8));
      double texture = 0.55;
      for (const Blob& blob : blobs) {
        const double d2 = (Point2(double(x), double(y)) - blob.c).squaredNorm();
        texture += blob.amplitude * std::exp(-0.5 * d2 / (blob.radius * blob.radius));
      }
      texture = std::clamp(texture, 0.25, 0.95);
      out.image(y, x) = 0.05 + inside * (texture - 0.05);
      out.mask(y, x) = rho <= 1.0 ? 1 : 0;
    }
  }
  out.image = rescale_unit(out.image);
  return out;
}

}  // namespace pouchreg
