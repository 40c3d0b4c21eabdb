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
#include "pouchreg/metrics.hpp"

#include <limits>

#include "pouchreg/nonrigid.hpp"

namespace pouchreg {

double rmse(const Image& a, const Image& b, const Mask& region) { return std::sqrt(ssd(a, b, region)); }

double rmse(const Image& a, const Image& b) { return std::sqrt(ssd(a, b)); }

namespace {

double distance(const Point2& p, const Point2& q) {
  const double dx = p.x() - q.x();
  const double dy = p.y() - q.y();
  return std::sqrt(dx * dx + dy * dy);
}

// Points bucketed into square cells; nearest() searches rings of cells
// outward until the ring is provably farther than the best hit.
class BucketGrid {
 public:
  explicit BucketGrid(std::span<const Point2> pts) {
    Eigen::Vector2d lo = pts[0];
    Eigen::Vector2d hi = pts[0];
    for (const Point2& p : pts) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    origin_ = lo;
    const Eigen::Vector2d extent = (hi - lo).cwiseMax(1e-9);
    cell_ = std::max(std::sqrt(extent.x() * extent.y() / double(pts.size())), 1e-6);
    nx_ = std::max(1L, std::min(4096L, long(extent.x() / cell_) + 1));
    ny_ = std::max(1L, std::min(4096L, long(extent.y() / cell_) + 1));
    cell_ = std::max(cell_, std::max(extent.x() / double(nx_), extent.y() / double(ny_)));
    buckets_.resize(std::size_t(nx_ * ny_));
    for (const Point2& p : pts) {
      const auto [cx, cy] = cell_of(p);
      buckets_[std::size_t(std::clamp(cy, 0L, ny_ - 1) * nx_ + std::clamp(cx, 0L, nx_ - 1))].push_back(p);
    }
  }

  double nearest(const Point2& q) const {
    const auto [qx, qy] = cell_of(q);
    double best = std::numeric_limits<double>::infinity();
    // Rings closer than `first` miss the grid; rings beyond `last` cover none of it.
    const long first = std::max({0L, -qx, qx - (nx_ - 1), -qy, qy - (ny_ - 1)});
    const long last = std::max({std::abs(qx), std::abs(qx - (nx_ - 1)), std::abs(qy), std::abs(qy - (ny_ - 1))});
    auto visit = [&](long cx, long cy) {
      for (const Point2& p : buckets_[std::size_t(cy * nx_ + cx)]) best = std::min(best, distance(p, q));
    };
    for (long ring = first; ring <= last; ++ring) {
      const long x0 = std::max(qx - ring, 0L);
      const long x1 = std::min(qx + ring, nx_ - 1);
      for (long cy = std::max(qy - ring, 0L); cy <= std::min(qy + ring, ny_ - 1); ++cy) {
        if (cy == qy - ring || cy == qy + ring) {
          for (long cx = x0; cx <= x1; ++cx) visit(cx, cy);
        } else {
          if (qx - ring >= 0) visit(qx - ring, cy);
          if (ring > 0 && qx + ring < nx_) visit(qx + ring, cy);
        }
      }
      // Every unvisited point lies at least `ring` full cells away.
      if (best <= double(ring) * cell_) break;
    }
    return best;
  }

 private:
  std::pair<long, long> cell_of(const Point2& p) const {
    return {long(std::floor((p.x() - origin_.x()) / cell_)), long(std::floor((p.y() - origin_.y()) / cell_))};
  }

  Eigen::Vector2d origin_;
  double cell_ = 1.0;
  long nx_ = 1;
  long ny_ = 1;
  std::vector<std::vector<Point2>> buckets_;
};

}  // namespace

double directed_hausdorff(std::span<const Point2> from, std::span<const Point2> to) {
  if (from.empty() || to.empty()) throw std::invalid_argument("hausdorff: empty point set");
  const BucketGrid grid(to);
  double worst = 0.0;
  for (const Point2& p : from) worst = std::max(worst, grid.nearest(p));
  return worst;
}

double hausdorff(std::span<const Point2> a, std::span<const Point2> b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

Overlap overlap(const Mask& a, const Mask& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("overlap: dimension mismatch");
  const auto fa = (a != 0);
  const auto fb = (b != 0);
  const double inter = double((fa && fb).count());
  const double na = double(fa.count());
  const double nb = double(fb.count());
  Overlap out;
  if (na + nb == 0.0) {
    out.iou = 1.0;
    out.f1 = 1.0;
    out.vacuous = true;
    return out;
  }
  out.iou = inter / (na + nb - inter);
  out.f1 = 2.0 * inter / (na + nb);
  return out;
}

std::vector<Point2> boundary_points(const Mask& mask) {
  std::vector<Point2> pts;
  const Eigen::Index h = mask.rows();
  const Eigen::Index w = mask.cols();
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      if (!mask(y, x)) continue;
      const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1 || !mask(y, x - 1) || !mask(y, x + 1) ||
                        !mask(y - 1, x) || !mask(y + 1, x);
      if (edge) pts.emplace_back(double(x), double(y));
    }
  }
  return pts;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  for (const double v : values) out.mean += v;
  out.mean /= double(values.size());
  double var = 0.0;
  for (const double v : values) var += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(var / double(values.size()));
  return out;
}

}  // namespace pouchreg
