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
#include "pouchreg/nonrigid.hpp"

#include <algorithm>

namespace pouchreg {

void EnergyConfig::validate() const {
  if (!(reg_weight >= 0.0)) throw std::invalid_argument("energy config: reg_weight must be >= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("energy config: epsilon must be > 0");
  if (max_iters < 0) throw std::invalid_argument("energy config: max_iters must be >= 0");
  if (levels < 1) throw std::invalid_argument("energy config: levels must be >= 1");
  if (base_cells < 1) throw std::invalid_argument("energy config: base_cells must be >= 1");
  if (!(step > 0.0)) throw std::invalid_argument("energy config: step must be > 0");
  if (!(roi_margin >= 0.0)) throw std::invalid_argument("energy config: roi_margin must be >= 0");
}

double ssd(const Image& a, const Image& b, const Mask& region, const Mask* valid) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != region.rows() || a.cols() != region.cols() ||
      (valid && (valid->rows() != a.rows() || valid->cols() != a.cols()))) {
    throw std::invalid_argument("ssd: dimension mismatch");
  }
  double acc = 0.0;
  Eigen::Index n = 0;
  for (Eigen::Index y = 0; y < a.rows(); ++y) {
    for (Eigen::Index x = 0; x < a.cols(); ++x) {
      if (!region(y, x) || (valid && !(*valid)(y, x))) continue;
      const double r = a(y, x) - b(y, x);
      acc += r * r;
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("ssd: empty region");
  return acc / double(n);
}

double ssd(const Image& a, const Image& b) { return ssd(a, b, Mask::Ones(a.rows(), a.cols())); }

WarpResult warp_with_validity(const Image& src, const TransformChain& chain) {
  WarpResult out{Image(src.rows(), src.cols()), Mask(src.rows(), src.cols())};
  for (Eigen::Index y = 0; y < src.rows(); ++y) {
    for (Eigen::Index x = 0; x < src.cols(); ++x) {
      const Point2 q = chain(Point2(double(x), double(y)));
      const Sample s = bilinear_sample(src, q.x(), q.y());
      out.image(y, x) = s.value;
      out.valid(y, x) = s.valid ? 1 : 0;
    }
  }
  return out;
}

double warped_ssd(const Image& ref, const Image& src, const TransformChain& chain, const Mask& region) {
  const WarpResult w = warp_with_validity(src, chain);
  return ssd(ref, w.image, region, &w.valid);
}

namespace {

// One pyramid level's problem with everything but the active lattice frozen:
// every region pixel is pushed through the fixed prefix of the chain once, and
// its B-spline cell on the active lattice is cached.
class LevelProblem {
 public:
  LevelProblem(const Image& ref, const Image& src, const TransformChain& chain, const Mask& region,
               const EnergyConfig& cfg)
      : src_(src), reg_weight_(cfg.reg_weight) {
    if (chain.levels.empty()) throw std::invalid_argument("energy: chain has no active level");
    if (ref.rows() != src.rows() || ref.cols() != src.cols() || region.rows() != ref.rows() ||
        region.cols() != ref.cols()) {
      throw std::invalid_argument("energy: dimension mismatch");
    }
    const Lattice& active = chain.levels.back();
    TransformChain prefix{chain.rigid, {chain.levels.begin(), chain.levels.end() - 1}};
    for (Eigen::Index y = 0; y < ref.rows(); ++y) {
      for (Eigen::Index x = 0; x < ref.cols(); ++x) {
        if (!region(y, x)) continue;
        Pixel px;
        px.target = ref(y, x);
        px.q = prefix(Point2(double(x), double(y)));
        px.cell = active.locate(px.q.x(), px.q.y());
        if (px.cell.inside) {
          px.bs = basis_weights(px.cell.s);
          px.bt = basis_weights(px.cell.t);
        }
        pixels_.push_back(px);
      }
    }
    if (pixels_.empty()) throw std::invalid_argument("energy: empty region");
  }

  double energy(const Lattice& lat) const {
    double acc = 0.0;
    Eigen::Index n = 0;
    for (const Pixel& px : pixels_) {
      const Point2 w = px.q + displacement(px, lat);
      const Sample s = bilinear_sample(src_, w.x(), w.y());
      if (!s.valid) continue;
      const double r = s.value - px.target;
      acc += r * r;
      ++n;
    }
    if (n == 0) throw std::invalid_argument("energy: no valid samples in region");
    return acc / double(n) + reg_weight_ * lat.mean_squared_displacement();
  }

  LatticeGradient gradient(const Lattice& lat) const {
    LatticeGradient g{Raster<double>::Zero(lat.n() + 3, lat.m() + 3), Raster<double>::Zero(lat.n() + 3, lat.m() + 3)};
    double n = 0.0;
    for (const Pixel& px : pixels_) {
      const Point2 w = px.q + displacement(px, lat);
      const SampleGrad s = bilinear_sample_grad(src_, w.x(), w.y());
      if (!s.valid) continue;
      n += 1.0;
      if (!px.cell.inside) continue;
      const double r = s.value - px.target;
      const double gx = r * s.dx;
      const double gy = r * s.dy;
      for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 4; ++i) {
          const double wgt = px.bs[i] * px.bt[j];
          g.dx(px.cell.l + j, px.cell.k + i) += wgt * gx;
          g.dy(px.cell.l + j, px.cell.k + i) += wgt * gy;
        }
      }
    }
    if (n == 0.0) throw std::invalid_argument("energy: no valid samples in region");
    const double reg = 2.0 * reg_weight_ / double(lat.control_count());
    g.dx = g.dx * (2.0 / n) + reg * lat.dx();
    g.dy = g.dy * (2.0 / n) + reg * lat.dy();
    return g;
  }

 private:
  struct Pixel {
    double target = 0.0;
    Point2 q;
    LatticeCell cell;
    std::array<double, 4> bs{};
    std::array<double, 4> bt{};
  };

  static Eigen::Vector2d displacement(const Pixel& px, const Lattice& lat) {
    if (!px.cell.inside) return Eigen::Vector2d::Zero();
    double sx = 0.0;
    double sy = 0.0;
    for (int j = 0; j < 4; ++j) {
      double rx = 0.0;
      double ry = 0.0;
      for (int i = 0; i < 4; ++i) {
        rx += px.bs[i] * lat.dx()(px.cell.l + j, px.cell.k + i);
        ry += px.bs[i] * lat.dy()(px.cell.l + j, px.cell.k + i);
      }
      sx += px.bt[j] * rx;
      sy += px.bt[j] * ry;
    }
    return {sx, sy};
  }

  const Image& src_;
  double reg_weight_;
  std::vector<Pixel> pixels_;
};

constexpr double kMinStep = 1e-4;

Image downsample_times(Image img, int times) {
  for (int i = 0; i < times; ++i) img = downsample_half(img);
  return img;
}

}  // namespace

double energy(const Image& ref, const Image& src, const TransformChain& chain, const Mask& region,
              const EnergyConfig& cfg) {
  return LevelProblem(ref, src, chain, region, cfg).energy(chain.levels.back());
}

LatticeGradient grad_energy(const Image& ref, const Image& src, const TransformChain& chain, const Mask& region,
                            const EnergyConfig& cfg) {
  return LevelProblem(ref, src, chain, region, cfg).gradient(chain.levels.back());
}

LevelResult optimize_level(const Image& ref, const Image& src, const TransformChain& chain, const Mask& region,
                           const EnergyConfig& cfg, int level_index) {
  cfg.validate();
  const LevelProblem problem(ref, src, chain, region, cfg);
  LevelResult result;
  result.lattice = chain.levels.back();
  result.initial_energy = problem.energy(result.lattice);
  result.final_energy = result.initial_energy;

  double step = cfg.step;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const LatticeGradient g = problem.gradient(result.lattice);
    const double gmax = std::max(g.dx.abs().maxCoeff(), g.dy.abs().maxCoeff());
    if (!(gmax > 0.0)) break;

    Lattice trial = result.lattice;
    double trial_energy = result.final_energy;
    bool decreased = false;
    while (step >= kMinStep) {
      trial.dx() = result.lattice.dx() - (step / gmax) * g.dx;
      trial.dy() = result.lattice.dy() - (step / gmax) * g.dy;
      trial_energy = problem.energy(trial);
      if (trial_energy < result.final_energy) {
        decreased = true;
        break;
      }
      step *= 0.5;
    }
    if (!decreased) break;

    const double improvement = result.final_energy - trial_energy;
    result.lattice = std::move(trial);
    result.final_energy = trial_energy;
    result.log.push_back({level_index, iter, trial_energy, step});
    if (improvement < cfg.epsilon) break;
  }
  return result;
}

RoiRect roi_from_mask(const Mask& mask, double margin) {
  const Eigen::Array4i box = mask_bbox(mask);
  RoiRect roi;
  roi.x_left = std::max(0.0, double(box(0)) - margin);
  roi.y_left = std::max(0.0, double(box(1)) - margin);
  roi.x_right = std::min(double(mask.cols()), double(box(2)) + 1.0 + margin);
  roi.y_right = std::min(double(mask.rows()), double(box(3)) + 1.0 + margin);
  return roi;
}

Mask roi_region(const RoiRect& roi, Eigen::Index rows, Eigen::Index cols, double scale, double offset) {
  Mask region(rows, cols);
  for (Eigen::Index y = 0; y < rows; ++y) {
    for (Eigen::Index x = 0; x < cols; ++x) {
      region(y, x) = roi.contains(scale * double(x) + offset, scale * double(y) + offset) ? 1 : 0;
    }
  }
  return region;
}

TransformChain register_nonrigid(const Image& ref, const Image& src, const Mask& ref_mask, const RigidParams& rigid,
                                 const EnergyConfig& cfg, std::vector<IterationRecord>* log,
                                 const std::vector<Lattice>* initial) {
  cfg.validate();
  if (foreground_count(ref_mask) == 0) throw EmptyMaskError("reference mask is empty");
  if (ref.rows() != src.rows() || ref.cols() != src.cols() || ref.rows() != ref_mask.rows() ||
      ref.cols() != ref_mask.cols()) {
    throw std::invalid_argument("register_nonrigid: dimension mismatch");
  }
  const RoiRect roi = roi_from_mask(ref_mask, cfg.roi_margin);
  if (roi.width() < 8.0 || roi.height() < 8.0) {
    throw DegenerateRoiError("register_nonrigid: ROI smaller than 8 px per side");
  }
  const Mask full_region = roi_region(roi, ref.rows(), ref.cols());

  TransformChain chain;
  chain.rigid = rigid;
  double accepted_ssd = warped_ssd(ref, src, chain, full_region);

  for (int level = 1; level <= cfg.levels; ++level) {
    const int shrink = cfg.levels - level;
    const double scale = double(1 << shrink);
    const double offset = 0.5 * (scale - 1.0);
    const Image ref_level = downsample_times(ref, shrink);
    const Image src_level = downsample_times(src, shrink);
    const Mask region = roi_region(roi, ref_level.rows(), ref_level.cols(), scale, offset);

    const int cells = cfg.base_cells << (level - 1);
    TransformChain coarse = rescale(chain, scale, offset);
    const Lattice zero_full(roi, cells, cells);
    const Lattice* start = &zero_full;
    if (initial && initial->size() >= std::size_t(level)) {
      const Lattice& guess = (*initial)[std::size_t(level - 1)];
      if (guess.domain() == roi && guess.m() == cells && guess.n() == cells) start = &guess;
    }
    coarse.levels.push_back(rescale(*start, scale, offset));

    Lattice accepted = zero_full;
    if (foreground_count(region) > 0) {
      const LevelResult res = optimize_level(ref_level, src_level, coarse, region, cfg, level);
      if (log) log->insert(log->end(), res.log.begin(), res.log.end());
      Lattice candidate(roi, cells, cells);
      candidate.dx() = res.lattice.dx() * scale;
      candidate.dy() = res.lattice.dy() * scale;

      TransformChain trial = chain;
      trial.levels.push_back(candidate);
      const double trial_ssd = warped_ssd(ref, src, trial, full_region);
      if (trial_ssd <= accepted_ssd + cfg.epsilon) {
        accepted = std::move(candidate);
        accepted_ssd = trial_ssd;
      }
    }
    chain.levels.push_back(std::move(accepted));
  }
  return chain;
}

}  // namespace pouchreg
