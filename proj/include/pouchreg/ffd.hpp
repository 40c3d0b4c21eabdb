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
#include <vector>

#include "pouchreg/image.hpp"
#include "pouchreg/rigid.hpp"

namespace pouchreg {

/// Half-open rectangle [x_left, x_right) x [y_left, y_right) in pixel coordinates.
struct RoiRect {
  double x_left = 0.0;
  double x_right = 1.0;
  double y_left = 0.0;
  double y_right = 1.0;

  bool contains(double x, double y) const {
    return x >= x_left && x < x_right && y >= y_left && y < y_right;
  }
  double width() const { return x_right - x_left; }
  double height() const { return y_right - y_left; }
  bool operator==(const RoiRect&) const = default;
};

/// Uniform cubic B-spline basis B_i(t), i in 0..3, t in [0,1).
template <typename Scalar>
Scalar basis(int i, Scalar t) {
  const Scalar t2 = t * t;
  const Scalar t3 = t2 * t;
  switch (i) {
    case 0: {
      const Scalar u = Scalar(1) - t;
      return u * u * u / Scalar(6);
    }
    case 1:
      return (Scalar(3) * t3 - Scalar(6) * t2 + Scalar(4)) / Scalar(6);
    case 2:
      return (Scalar(-3) * t3 + Scalar(3) * t2 + Scalar(3) * t + Scalar(1)) / Scalar(6);
    case 3:
      return t3 / Scalar(6);
    default:
      throw std::invalid_argument("basis: index must be in 0..3");
  }
}

template <typename Scalar>
std::array<Scalar, 4> basis_weights(Scalar t) {
  return {basis(0, t), basis(1, t), basis(2, t), basis(3, t)};
}

/// Where a point falls on a lattice: the first of the four supporting control
/// indices per axis and the fractional offsets within the cell.
struct LatticeCell {
  int k = 0;
  int l = 0;
  double s = 0.0;
  double t = 0.0;
  bool inside = false;
};

struct Displacement {
  Eigen::Vector2d d = Eigen::Vector2d::Zero();
  bool inside = false;
};

/// One level of a free-form deformation: an (m+3) x (n+3) grid of control
/// displacements over a fixed domain, with one phantom ring outside the domain
/// on every side. Storage is row-major with rows indexed by y (n+3 rows).
template <typename Scalar>
class BasicLattice {
 public:
  using Grid = Raster<Scalar>;

  BasicLattice() : BasicLattice(RoiRect{}, 1, 1) {}
  BasicLattice(const RoiRect& domain, int m, int n)
      : domain_(domain), m_(m), n_(n), dx_(Grid::Zero(n + 3, m + 3)), dy_(Grid::Zero(n + 3, m + 3)) {
    if (m < 1 || n < 1) throw std::invalid_argument("lattice: m and n must be positive");
    if (!(domain.x_left < domain.x_right && domain.y_left < domain.y_right)) {
      throw std::invalid_argument("lattice: degenerate domain");
    }
  }

  const RoiRect& domain() const { return domain_; }
  int m() const { return m_; }
  int n() const { return n_; }
  int control_count() const { return (m_ + 3) * (n_ + 3); }

  Grid& dx() { return dx_; }
  Grid& dy() { return dy_; }
  const Grid& dx() const { return dx_; }
  const Grid& dy() const { return dy_; }

  /// Lattice units: u = (x - X_l) m / (X_r - X_l) + 1, so u spans [1, m+1) on the domain.
  LatticeCell locate(double x, double y) const {
    LatticeCell cell;
    if (!domain_.contains(x, y)) return cell;
    const double u = (x - domain_.x_left) * double(m_) / domain_.width() + 1.0;
    const double v = (y - domain_.y_left) * double(n_) / domain_.height() + 1.0;
    // Rounding can push u onto m+1 for x just below X_r.
    const double fu = std::min(std::floor(u), double(m_));
    const double fv = std::min(std::floor(v), double(n_));
    cell.k = int(fu) - 1;
    cell.l = int(fv) - 1;
    cell.s = u - fu;
    cell.t = v - fv;
    cell.inside = true;
    return cell;
  }

  Displacement displace(double x, double y) const {
    const LatticeCell cell = locate(x, y);
    Displacement out;
    if (!cell.inside) return out;
    const auto bs = basis_weights(Scalar(cell.s));
    const auto bt = basis_weights(Scalar(cell.t));
    Scalar sx(0);
    Scalar sy(0);
    for (int j = 0; j < 4; ++j) {
      Scalar rx(0);
      Scalar ry(0);
      for (int i = 0; i < 4; ++i) {
        rx += bs[i] * dx_(cell.l + j, cell.k + i);
        ry += bs[i] * dy_(cell.l + j, cell.k + i);
      }
      sx += bt[j] * rx;
      sy += bt[j] * ry;
    }
    out.d = Eigen::Vector2d(double(sx), double(sy));
    out.inside = true;
    return out;
  }

  Point2 operator()(const Point2& p) const { return p + displace(p.x(), p.y()).d; }

  Scalar max_abs_displacement() const {
    return std::max(dx_.abs().maxCoeff(), dy_.abs().maxCoeff());
  }

  /// Mean over control points of |phi|^2.
  Scalar mean_squared_displacement() const {
    return (dx_.square() + dy_.square()).sum() / Scalar(control_count());
  }

 private:
  RoiRect domain_;
  int m_;
  int n_;
  Grid dx_;
  Grid dy_;
};

using Lattice = BasicLattice<double>;

/// Displacement f(x, y) of a lattice; zero and `inside == false` outside its domain.
inline Displacement ffd_displace(const Lattice& lat, double x, double y) { return lat.displace(x, y); }

/// Fresh zero lattice over the same domain with twice the cells per axis.
Lattice refine_level(const Lattice& lat);

/// Rigid transform followed by lattice levels, evaluated in that fixed order.
/// Maps reference-frame coordinates to source-frame coordinates.
struct TransformChain {
  RigidParams rigid;
  std::vector<Lattice> levels;

  std::size_t level_count() const { return levels.size(); }
  Point2 operator()(const Point2& p) const;
};

Point2 compose_apply(const TransformChain& chain, const Point2& p);

/// Conjugates a transform into the coordinates p' = (p - offset) / scale.
/// Used to move between full resolution and downsampled pyramid levels.
RigidParams rescale(const RigidParams& params, double scale, double offset);
Lattice rescale(const Lattice& lat, double scale, double offset);
TransformChain rescale(const TransformChain& chain, double scale, double offset);

}  // namespace pouchreg
