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

#include "pouchreg/ffd.hpp"

namespace pouchreg {

class DegenerateRoiError : public Error {
 public:
  using Error::Error;
};

struct EnergyConfig {
  double reg_weight = 0.01;  ///< weight on the mean squared control displacement
  double epsilon = 1e-6;     ///< stop when one iteration improves the energy by less
  int max_iters = 100;       ///< per level
  int levels = 3;
  int base_cells = 4;        ///< cells per axis on the coarsest level
  double step = 1.0;         ///< initial step, in pixels of the largest control move
  double roi_margin = 10.0;  ///< pixels added around the mask bounding box

  void validate() const;
};

/// Mean squared difference over the pixels set in `region` (and in `valid`,
/// when given). Throws on dimension mismatch or an empty region.
double ssd(const Image& a, const Image& b, const Mask& region, const Mask* valid = nullptr);
double ssd(const Image& a, const Image& b);

/// Backward warp that also reports which output pixels sampled inside the source.
struct WarpResult {
  Image image;
  Mask valid;
};
WarpResult warp_with_validity(const Image& src, const TransformChain& chain);

/// ssd(ref, warp(src, chain)) over `region`, excluding out-of-domain samples.
double warped_ssd(const Image& ref, const Image& src, const TransformChain& chain, const Mask& region);

/// E = SSD + reg_weight * mean |phi|^2 of the active (last) level of `chain`.
double energy(const Image& ref, const Image& src, const TransformChain& chain, const Mask& region,
              const EnergyConfig& cfg);

/// Analytic gradient of energy() with respect to the active level's control
/// displacements, shaped like the lattice (x and y components separately).
struct LatticeGradient {
  Raster<double> dx;
  Raster<double> dy;
};
LatticeGradient grad_energy(const Image& ref, const Image& src, const TransformChain& chain,
                            const Mask& region, const EnergyConfig& cfg);

struct IterationRecord {
  int level = 0;
  int iter = 0;
  double energy = 0.0;
  double step = 0.0;
};

struct LevelResult {
  Lattice lattice;
  std::vector<IterationRecord> log;
  double initial_energy = 0.0;
  double final_energy = 0.0;
};

/// Gradient descent on the last level of `chain`. Each iteration moves along
/// the negative gradient scaled so the largest control move equals the current
/// step, halving the step until the energy decreases. Stops when an iteration
/// gains less than epsilon, no decrease can be found, or after max_iters.
LevelResult optimize_level(const Image& ref, const Image& src, const TransformChain& chain, const Mask& region,
                           const EnergyConfig& cfg, int level_index = 1);

/// Bounding box of the mask grown by `margin` and clipped to the frame.
RoiRect roi_from_mask(const Mask& mask, double margin);

/// Pixels whose centres lie inside `roi`, for a raster of the given size whose
/// pixel i sits at full-resolution coordinate scale * i + offset.
Mask roi_region(const RoiRect& roi, Eigen::Index rows, Eigen::Index cols, double scale = 1.0,
                double offset = 0.0);

/// Coarse-to-fine FFD registration of `src` onto `ref` after `rigid`.
/// Level l (1-based) runs on images downsampled (levels - l) times with
/// base_cells * 2^(l-1) cells per axis; a level whose result raises the
/// full-resolution SSD by more than epsilon is replaced by a zero lattice.
/// When `initial` holds a lattice with the same domain and resolution as
/// level l, that level starts from it instead of from zero.
TransformChain register_nonrigid(const Image& ref, const Image& src, const Mask& ref_mask,
                                 const RigidParams& rigid, const EnergyConfig& cfg,
                                 std::vector<IterationRecord>* log = nullptr,
                                 const std::vector<Lattice>* initial = nullptr);

}  // namespace pouchreg
