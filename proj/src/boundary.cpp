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
#include "pouchreg/boundary.hpp"

#include <limits>
#include <numbers>

namespace pouchreg {

void RefineConfig::validate() const {
  if (radial_samples < 8) throw std::invalid_argument("refine config: radial_samples must be >= 8");
  if (angular_samples < 16) throw std::invalid_argument("refine config: angular_samples must be >= 16");
  if (max_radial_jump < 1) throw std::invalid_argument("refine config: max_radial_jump must be >= 1");
  if (!(band_fraction > 0.0 && band_fraction < 1.0)) {
    throw std::invalid_argument("refine config: band_fraction must lie in (0,1)");
  }
  if (!(smoothing_sigma > 0.0)) throw std::invalid_argument("refine config: smoothing_sigma must be > 0");
}

ClosedPath min_closed_path(const Eigen::ArrayXXd& weights, int max_jump) {
  const int rows = int(weights.rows());
  const int cols = int(weights.cols());
  if (rows < 1 || cols < 1) throw std::invalid_argument("min_closed_path: empty weight table");
  if (max_jump < 0) throw std::invalid_argument("min_closed_path: max_jump must be >= 0");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  ClosedPath best;
  best.cost = kInf;
  // cost_to_go(c, r): cheapest completion from row r of column c to the end,
  // given the start row fixed by the outer loop.
  Eigen::ArrayXXd cost_to_go(rows, cols);
  for (int start = 0; start < rows; ++start) {
    for (int r = 0; r < rows; ++r) {
      cost_to_go(r, cols - 1) = std::abs(r - start) <= max_jump ? weights(r, cols - 1) : kInf;
    }
    for (int c = cols - 2; c >= 0; --c) {
      for (int r = 0; r < rows; ++r) {
        double m = kInf;
        for (int rr = std::max(0, r - max_jump); rr <= std::min(rows - 1, r + max_jump); ++rr) {
          m = std::min(m, cost_to_go(rr, c + 1));
        }
        cost_to_go(r, c) = weights(r, c) + m;
      }
    }
    const double total = cost_to_go(start, 0);
    if (!(total < best.cost)) continue;

    best.cost = total;
    best.rows.assign(std::size_t(cols), start);
    for (int c = 1; c < cols; ++c) {
      const int prev = best.rows[std::size_t(c - 1)];
      int chosen = -1;
      double m = kInf;
      for (int rr = std::max(0, prev - max_jump); rr <= std::min(rows - 1, prev + max_jump); ++rr) {
        if (cost_to_go(rr, c) < m) {
          m = cost_to_go(rr, c);
          chosen = rr;
        }
      }
      best.rows[std::size_t(c)] = chosen;
    }
  }
  if (!(best.cost < kInf)) throw Error("min_closed_path: no feasible closed path");
  return best;
}

Mask rasterize_polygon(const Polygon& polygon, Eigen::Index rows, Eigen::Index cols) {
  Mask out = Mask::Zero(rows, cols);
  const std::size_t n = polygon.size();
  if (n < 3) return out;
  for (Eigen::Index y = 0; y < rows; ++y) {
    const double py = double(y);
    for (Eigen::Index x = 0; x < cols; ++x) {
      const double px = double(x);
      bool inside = false;
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = polygon[i];
        const Point2& b = polygon[j];
        if ((a.y() > py) != (b.y() > py)) {
          const double xi = a.x() + (py - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
          if (px < xi) inside = !inside;
        }
      }
      out(y, x) = inside ? 1 : 0;
    }
  }
  return out;
}

namespace {

// Distance from the centre to the first background pixel along a ray.
double ray_exit_radius(const Mask& mask, const Point2& centre, double angle) {
  constexpr double kStep = 0.1;
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  const double limit = double(mask.rows() + mask.cols());
  double r = 0.0;
  for (double t = kStep; t < limit; t += kStep) {
    const long x = std::lround(centre.x() + t * dx);
    const long y = std::lround(centre.y() + t * dy);
    if (x < 0 || y < 0 || x >= mask.cols() || y >= mask.rows() || !mask(y, x)) break;
    r = t;
  }
  return r;
}

}  // namespace

RefineResult refine_boundary(const Image& img, const Mask& initial, const RefineConfig& cfg) {
  cfg.validate();
  if (img.rows() != initial.rows() || img.cols() != initial.cols()) {
    throw std::invalid_argument("refine_boundary: image and mask dimensions differ");
  }
  if (foreground_count(initial) == 0) throw EmptyMaskError("refine_boundary: initial mask is empty");
  const Mask component = largest_component(initial);

  RefineResult out;
  out.centre = mask_centroid(component);
  if (!(out.centre.x() >= 0.0 && out.centre.y() >= 0.0 && out.centre.x() <= double(img.cols() - 1) &&
        out.centre.y() <= double(img.rows() - 1))) {
    throw Error("refine_boundary: centroid outside image");
  }

  const Image edges = gradient_magnitude(gaussian_filter(img, cfg.smoothing_sigma));
  const int n_theta = cfg.angular_samples;
  const int n_rad = cfg.radial_samples;
  out.initial_radius.resize(std::size_t(n_theta));
  Eigen::ArrayXXd weights(n_rad, n_theta);
  for (int c = 0; c < n_theta; ++c) {
    const double angle = 2.0 * std::numbers::pi * double(c) / double(n_theta);
    const double r0 = std::max(1.0, ray_exit_radius(component, out.centre, angle));
    out.initial_radius[std::size_t(c)] = r0;
    for (int r = 0; r < n_rad; ++r) {
      const double rho = r0 * (1.0 - cfg.band_fraction + 2.0 * cfg.band_fraction * double(r) / double(n_rad - 1));
      const Sample s =
          bilinear_sample(edges, out.centre.x() + rho * std::cos(angle), out.centre.y() + rho * std::sin(angle));
      if (!s.valid) out.band_clipped = true;
      weights(r, c) = -s.value;
    }
  }

  const ClosedPath path = min_closed_path(weights, cfg.max_radial_jump);
  out.radius.resize(std::size_t(n_theta));
  out.polygon.reserve(std::size_t(n_theta));
  for (int c = 0; c < n_theta; ++c) {
    const double angle = 2.0 * std::numbers::pi * double(c) / double(n_theta);
    const double r0 = out.initial_radius[std::size_t(c)];
    const double rho = r0 * (1.0 - cfg.band_fraction +
                             2.0 * cfg.band_fraction * double(path.rows[std::size_t(c)]) / double(n_rad - 1));
    out.radius[std::size_t(c)] = rho;
    out.polygon.emplace_back(out.centre.x() + rho * std::cos(angle), out.centre.y() + rho * std::sin(angle));
  }
  out.mask = rasterize_polygon(out.polygon, img.rows(), img.cols());
  return out;
}

}  // namespace pouchreg
