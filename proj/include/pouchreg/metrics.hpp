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

#include <span>
#include <vector>

#include "pouchreg/image.hpp"

namespace pouchreg {

double rmse(const Image& a, const Image& b, const Mask& region);
double rmse(const Image& a, const Image& b);

/// Symmetric Hausdorff distance between two point sets. Exact; nearest
/// neighbours are found through a uniform bucket grid over `b` (and `a`).
double hausdorff(std::span<const Point2> a, std::span<const Point2> b);

/// Largest distance from a point of `from` to its nearest point of `to`.
double directed_hausdorff(std::span<const Point2> from, std::span<const Point2> to);

struct Overlap {
  double iou = 0.0;
  double f1 = 0.0;       ///< Dice: 2|a n b| / (|a| + |b|)
  bool vacuous = false;  ///< both masks empty; iou and f1 are reported as 1
};

Overlap overlap(const Mask& a, const Mask& b);
inline double iou(const Mask& a, const Mask& b) { return overlap(a, b).iou; }
inline double f1(const Mask& a, const Mask& b) { return overlap(a, b).f1; }

/// Centres of foreground pixels with at least one background 4-neighbour
/// (pixels on the frame edge count as touching background).
std::vector<Point2> boundary_points(const Mask& mask);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
};
MeanStd mean_std(std::span<const double> values);

}  // namespace pouchreg
