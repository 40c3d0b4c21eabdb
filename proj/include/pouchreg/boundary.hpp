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
#pragma once

#include <vector>

#include "pouchreg/image.hpp"

namespace pouchreg {

struct RefineConfig {
  double smoothing_sigma = 2.0;
  int radial_samples = 41;
  int angular_samples = 360;
  int max_radial_jump = 2;
  double band_fraction = 0.25;

  void validate() const;
};

/// Minimum-cost closed path through a column graph: one row per column,
/// consecutive rows (and last vs first) differ by at most `max_jump`.
/// Ties go to the smallest start row, then the lexicographically smallest rows.
struct ClosedPath {
  std::vector<int> rows;
  double cost = 0.0;
};

/// `weights` is rows x columns (radial x angular).
ClosedPath min_closed_path(const Eigen::ArrayXXd& weights, int max_jump);

using Polygon = std::vector<Point2>;

struct RefineResult {
  Mask mask;
  Polygon polygon;          ///< one vertex per angular sample, by increasing angle
  Point2 centre;
  std::vector<double> initial_radius;
  std::vector<double> radius;
  bool band_clipped = false;  ///< some band samples fell outside the image
};

/// Snaps the boundary of `initial` to the strongest nearby edge of `img`:
/// smooth, take gradient magnitude, unwrap a polar band around the initial
/// boundary and run min_closed_path on the negated gradient.
RefineResult refine_boundary(const Image& img, const Mask& initial, const RefineConfig& cfg = {});

/// Even-odd fill of a closed polygon, sampled at pixel centres.
Mask rasterize_polygon(const Polygon& polygon, Eigen::Index rows, Eigen::Index cols);

}  // namespace pouchreg
