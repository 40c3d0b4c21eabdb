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
#include "pouchreg/rigid.hpp"

#include <cmath>

namespace pouchreg {

double normalize_angle(double theta) {
  constexpr double kPi = std::numbers::pi;
  double t = std::remainder(theta, 2.0 * kPi);
  if (t <= -kPi) t += 2.0 * kPi;
  return t;
}

Point2 RigidParams::operator()(const Point2& p) const {
  if (theta == 0.0) return {p.x() + tx, p.y() + ty};
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double dx = p.x() - cx;
  const double dy = p.y() - cy;
  return {c * dx - s * dy + cx + tx, s * dx + c * dy + cy + ty};
}

Point2 apply_rigid(const RigidParams& params, const Point2& pt) { return params(pt); }

void RigidConfig::validate() const {
  if (!(min_step > 0.0 && min_step < initial_step)) {
    throw std::invalid_argument("rigid config: need 0 < min_step < initial_step");
  }
  if (!(relaxation > 0.0 && relaxation < 1.0)) {
    throw std::invalid_argument("rigid config: relaxation must lie in (0,1)");
  }
  if (max_iters < 1) throw std::invalid_argument("rigid config: max_iters must be positive");
  if (!(smoothing_sigma > 0.0)) throw std::invalid_argument("rigid config: smoothing_sigma must be > 0");
}

namespace {

constexpr double kThetaDelta = 1e-3;
constexpr double kShiftDelta = 0.25;

// Optimization variables are (theta * radius, tx, ty) so that one unit of step
// moves the mask boundary by roughly one pixel in every coordinate.
class RigidCost {
 public:
  RigidCost(const Image& ref, const Image& src, const Point2& centre, double radius)
      : ref_(ref), src_(src), centre_(centre), radius_(radius) {}

  RigidParams params(const Eigen::Vector3d& z) const {
    return {normalize_angle(z(0) / radius_), z(1), z(2), centre_.x(), centre_.y()};
  }

  double operator()(const Eigen::Vector3d& z) const {
    const RigidParams p = params(z);
    double acc = 0.0;
    Eigen::Index n = 0;
    for (Eigen::Index y = 0; y < ref_.rows(); ++y) {
      for (Eigen::Index x = 0; x < ref_.cols(); ++x) {
        const Point2 q = p(Point2(double(x), double(y)));
        const Sample s = bilinear_sample(src_, q.x(), q.y());
        if (!s.valid) continue;
        const double r = ref_(y, x) - s.value;
        acc += r * r;
        ++n;
      }
    }
    return n > 0 ? acc / double(n) : 0.0;
  }

  Eigen::Vector3d gradient(const Eigen::Vector3d& z) const {
    const Eigen::Vector3d h(kThetaDelta * radius_, kShiftDelta, kShiftDelta);
    Eigen::Vector3d g;
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d zp = z;
      Eigen::Vector3d zm = z;
      zp(i) += h(i);
      zm(i) -= h(i);
      g(i) = ((*this)(zp) - (*this)(zm)) / (2.0 * h(i));
    }
    return g;
  }

 private:
  const Image& ref_;
  const Image& src_;
  Point2 centre_;
  double radius_;
};

}  // namespace

RigidResult register_rigid(const Mask& ref_mask, const Mask& src_mask, const RigidParams& init,
                           const RigidConfig& cfg) {
  cfg.validate();
  if (foreground_count(ref_mask) == 0) throw EmptyMaskError("reference mask is empty");
  if (foreground_count(src_mask) == 0) throw EmptyMaskError("source mask is empty");
  if (ref_mask.rows() != src_mask.rows() || ref_mask.cols() != src_mask.cols()) {
    throw std::invalid_argument("register_rigid: mask dimensions differ");
  }

  const Image ref = gaussian_filter(ref_mask.cast<double>(), cfg.smoothing_sigma);
  const Image src = gaussian_filter(src_mask.cast<double>(), cfg.smoothing_sigma);
  const Point2 centre = mask_centroid(ref_mask);
  const double radius =
      std::max(1.0, std::sqrt(double(foreground_count(ref_mask)) / std::numbers::pi));
  const RigidCost cost(ref, src, centre, radius);

  // Re-express the initial transform about the reference centroid.
  const Point2 moved = init(centre);
  Eigen::Vector3d z(normalize_angle(init.theta) * radius, moved.x() - centre.x(), moved.y() - centre.y());

  RigidResult result;
  result.initial_cost = cost(z);
  result.cost = result.initial_cost;
  result.params = cost.params(z);

  double step = cfg.initial_step;
  Eigen::Vector3d g = cost.gradient(z);
  int iter = 0;
  while (iter < cfg.max_iters && step >= cfg.min_step) {
    const double norm = g.norm();
    if (norm == 0.0) break;
    z -= step * g / norm;
    ++iter;
    const double c = cost(z);
    if (c < result.cost) {
      result.cost = c;
      result.params = cost.params(z);
    }
    const Eigen::Vector3d g_new = cost.gradient(z);
    if (g_new.dot(g) < 0.0) step *= cfg.relaxation;
    g = g_new;
  }
  result.iterations = iter;
  return result;
}

}  // namespace pouchreg
