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

#include <numbers>

#include "pouchreg/image.hpp"

namespace pouchreg {

/// Rotation about a fixed centre followed by a translation:
/// p -> R(theta) (p - c) + c + t.
struct RigidParams {
  double theta = 0.0;  ///< radians, kept in (-pi, pi]
  double tx = 0.0;
  double ty = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  static RigidParams identity() { return {}; }
  static RigidParams about(const Point2& centre) { return {0.0, 0.0, 0.0, centre.x(), centre.y()}; }

  bool is_identity() const { return theta == 0.0 && tx == 0.0 && ty == 0.0; }
  Point2 operator()(const Point2& p) const;
};

double normalize_angle(double theta);

Point2 apply_rigid(const RigidParams& params, const Point2& pt);

struct RigidConfig {
  double initial_step = 2.0;
  double min_step = 1e-3;
  double relaxation = 0.5;
  int max_iters = 200;
  double smoothing_sigma = 2.0;

  void validate() const;
};

struct RigidResult {
  RigidParams params;
  double cost = 0.0;
  double initial_cost = 0.0;
  int iterations = 0;
};

/// Regular-step gradient descent on (theta, tx, ty) minimizing the SSD between
/// the smoothed reference mask and the backward-warped smoothed source mask.
/// The rotation centre is always the reference-mask centroid; `init` supplies
/// the starting angle and translation (warm start). Returns the best iterate.
RigidResult register_rigid(const Mask& ref_mask, const Mask& src_mask, const RigidParams& init,
                           const RigidConfig& cfg = {});

}  // namespace pouchreg
