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
#include "pouchreg/image.hpp"

#include <array>
#include <vector>

namespace pouchreg {

SampleGrad bilinear_sample_grad(const Image& img, double x, double y) {
  const Eigen::Index w = img.cols();
  const Eigen::Index h = img.rows();
  if (!(x >= 0.0 && y >= 0.0 && x <= double(w - 1) && y <= double(h - 1))) {
    return {};
  }
  // Derivatives need a full cell; on the last row/column use the cell to its left/top.
  Eigen::Index x0 = static_cast<Eigen::Index>(std::floor(x));
  Eigen::Index y0 = static_cast<Eigen::Index>(std::floor(y));
  if (w > 1) x0 = std::min(x0, w - 2);
  if (h > 1) y0 = std::min(y0, h - 2);
  const Eigen::Index x1 = std::min(x0 + 1, w - 1);
  const Eigen::Index y1 = std::min(y0 + 1, h - 1);
  const double fx = x - double(x0);
  const double fy = y - double(y0);
  const double v00 = img(y0, x0);
  const double v01 = img(y0, x1);
  const double v10 = img(y1, x0);
  const double v11 = img(y1, x1);
  SampleGrad out;
  out.valid = true;
  const double top = v00 + fx * (v01 - v00);
  const double bottom = v10 + fx * (v11 - v10);
  out.value = top + fy * (bottom - top);
  out.dx = (x1 != x0) ? (1.0 - fy) * (v01 - v00) + fy * (v11 - v10) : 0.0;
  out.dy = (y1 != y0) ? bottom - top : 0.0;
  return out;
}

Eigen::ArrayXd gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_filter: sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  Eigen::ArrayXd k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) {
    k(i + radius) = std::exp(-0.5 * double(i) * double(i) / (sigma * sigma));
  }
  return k / k.sum();
}

namespace {

// One separable pass along rows (horizontal) with edge clamping.
Image convolve_rows(const Image& img, const Eigen::ArrayXd& k) {
  const Eigen::Index radius = (k.size() - 1) / 2;
  const Eigen::Index w = img.cols();
  Image out(img.rows(), w);
  for (Eigen::Index y = 0; y < img.rows(); ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (Eigen::Index t = -radius; t <= radius; ++t) {
        const Eigen::Index xs = std::clamp<Eigen::Index>(x + t, 0, w - 1);
        acc += k(t + radius) * img(y, xs);
      }
      out(y, x) = acc;
    }
  }
  return out;
}

}  // namespace

Image gaussian_filter(const Image& img, double sigma) {
  const Eigen::ArrayXd k = gaussian_kernel(sigma);
  const Image horizontal = convolve_rows(img, k);
  const Image transposed = horizontal.transpose();
  return convolve_rows(transposed, k).transpose();
}

Image gradient_magnitude(const Image& img) {
  const Eigen::Index w = img.cols();
  const Eigen::Index h = img.rows();
  if (w < 3 || h < 3) throw std::invalid_argument("gradient_magnitude: image must be at least 3x3");
  Image out(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      double gx;
      if (x == 0) {
        gx = img(y, 1) - img(y, 0);
      } else if (x == w - 1) {
        gx = img(y, w - 1) - img(y, w - 2);
      } else {
        gx = 0.5 * (img(y, x + 1) - img(y, x - 1));
      }
      double gy;
      if (y == 0) {
        gy = img(1, x) - img(0, x);
      } else if (y == h - 1) {
        gy = img(h - 1, x) - img(h - 2, x);
      } else {
        gy = 0.5 * (img(y + 1, x) - img(y - 1, x));
      }
      out(y, x) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

Image downsample_half(const Image& img) {
  if (img.cols() < 2 || img.rows() < 2) {
    throw std::invalid_argument("downsample_half: image must be at least 2x2");
  }
  const Eigen::Index w2 = (img.cols() + 1) / 2;
  const Eigen::Index h2 = (img.rows() + 1) / 2;
  Image out(h2, w2);
  for (Eigen::Index y = 0; y < h2; ++y) {
    for (Eigen::Index x = 0; x < w2; ++x) {
      double acc = 0.0;
      int count = 0;
      for (Eigen::Index dy = 0; dy < 2; ++dy) {
        for (Eigen::Index dx = 0; dx < 2; ++dx) {
          const Eigen::Index ys = 2 * y + dy;
          const Eigen::Index xs = 2 * x + dx;
          if (ys < img.rows() && xs < img.cols()) {
            acc += img(ys, xs);
            ++count;
          }
        }
      }
      out(y, x) = acc / count;
    }
  }
  return out;
}

Mask downsample_half(const Mask& mask) {
  const Image half = downsample_half(Image(mask.cast<double>()));
  return (half >= 0.5).cast<std::uint8_t>();
}

Point2 mask_centroid(const Mask& mask) {
  double sx = 0.0;
  double sy = 0.0;
  Eigen::Index n = 0;
  for (Eigen::Index y = 0; y < mask.rows(); ++y) {
    for (Eigen::Index x = 0; x < mask.cols(); ++x) {
      if (mask(y, x)) {
        sx += double(x);
        sy += double(y);
        ++n;
      }
    }
  }
  if (n == 0) throw EmptyMaskError();
  return {sx / double(n), sy / double(n)};
}

Eigen::Array4i mask_bbox(const Mask& mask) {
  int x_min = int(mask.cols());
  int y_min = int(mask.rows());
  int x_max = -1;
  int y_max = -1;
  for (Eigen::Index y = 0; y < mask.rows(); ++y) {
    for (Eigen::Index x = 0; x < mask.cols(); ++x) {
      if (mask(y, x)) {
        x_min = std::min(x_min, int(x));
        y_min = std::min(y_min, int(y));
        x_max = std::max(x_max, int(x));
        y_max = std::max(y_max, int(y));
      }
    }
  }
  if (x_max < 0) throw EmptyMaskError();
  return {x_min, y_min, x_max, y_max};
}

Mask largest_component(const Mask& mask) {
  const Eigen::Index w = mask.cols();
  const Eigen::Index h = mask.rows();
  Raster<int> label = Raster<int>::Zero(h, w);
  std::vector<Eigen::Index> sizes{0};
  std::vector<std::array<Eigen::Index, 2>> stack;
  int next = 0;
  for (Eigen::Index y0 = 0; y0 < h; ++y0) {
    for (Eigen::Index x0 = 0; x0 < w; ++x0) {
      if (!mask(y0, x0) || label(y0, x0)) continue;
      ++next;
      sizes.push_back(0);
      stack.push_back({y0, x0});
      label(y0, x0) = next;
      while (!stack.empty()) {
        const auto [y, x] = stack.back();
        stack.pop_back();
        ++sizes[next];
        constexpr int kOffsets[4][2] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
        for (const auto& o : kOffsets) {
          const Eigen::Index yy = y + o[0];
          const Eigen::Index xx = x + o[1];
          if (yy < 0 || xx < 0 || yy >= h || xx >= w) continue;
          if (mask(yy, xx) && !label(yy, xx)) {
            label(yy, xx) = next;
            stack.push_back({yy, xx});
          }
        }
      }
    }
  }
  if (next == 0) throw EmptyMaskError();
  int best = 1;
  for (int i = 2; i <= next; ++i) {
    if (sizes[i] > sizes[best]) best = i;
  }
  return (label == best).cast<std::uint8_t>();
}

Mask erode(const Mask& mask, int radius) {
  if (radius <= 0) return mask;
  const Eigen::Index w = mask.cols();
  const Eigen::Index h = mask.rows();
  Mask out = Mask::Zero(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      if (!mask(y, x)) continue;
      bool keep = true;
      for (int dy = -radius; dy <= radius && keep; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          if (dx * dx + dy * dy > radius * radius) continue;
          const Eigen::Index yy = y + dy;
          const Eigen::Index xx = x + dx;
          if (yy < 0 || xx < 0 || yy >= h || xx >= w || !mask(yy, xx)) {
            keep = false;
            break;
          }
        }
      }
      out(y, x) = keep ? 1 : 0;
    }
  }
  return out;
}

}  // namespace pouchreg
