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

#include <array>
#include <cstdint>

#include "pouchreg/ffd.hpp"

namespace pouchreg {

/// Parameters of the synthetic benchmark: a geometric distortion (random
/// rigid motion plus an elastic B-spline warp) followed by an intensity
/// distortion (Gaussian noise in random disks inside the pouch, then a
/// min/max rescale to [0,1]).
struct SynthSpec {
  std::uint64_t seed = 0;
  int count = 20;
  int elastic_grid = 5;
  double elastic_max_disp = 4.0;
  double rigid_max_theta = 0.15;
  double rigid_max_trans = 8.0;
  std::array<int, 2> disk_count_range{3, 8};
  std::array<double, 2> disk_radius_range{5.0, 15.0};
  double noise_sigma = 0.15;

  void validate() const;
};

struct GeometricSample {
  Image s1;
  Mask mask;             ///< reference mask carried through the same warp
  TransformChain truth;  ///< s1(p) = ref(truth(p))
};

/// Draws the rigid + elastic distortion for item `index` and applies it to
/// the reference image and mask. Deterministic in (spec.seed, index).
GeometricSample gen_geometric(const Image& ref, const Mask& ref_mask, const SynthSpec& spec, int index);

/// Adds the disk-shaped noise inside `mask` and rescales to [0,1].
Image gen_intensity(const Image& s1, const Mask& mask, const SynthSpec& spec, int index);

/// Affine min/max rescale to [0,1]; constant frames are returned unchanged.
Image rescale_unit(const Image& img);

/// RMSE over `mask` between `ref` and `s1` warped by `recovered`
/// (out-of-domain samples excluded).
double clean_register_eval(const Image& ref, const Image& s1, const TransformChain& recovered, const Mask& mask);

/// A textured, slightly egg-shaped pouch on a dark background, for demos and
/// tests where no microscopy frame is available.
struct Phantom {
  Image image;
  Mask mask;
};
Phantom make_phantom(int size, std::uint64_t seed = 0);

}  // namespace pouchreg
