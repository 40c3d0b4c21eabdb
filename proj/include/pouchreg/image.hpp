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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace pouchreg {

/// Dense 2-D raster stored row-major: `img(y, x)`, rows = height, cols = width.
template <typename Scalar>
using Raster = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Grayscale intensities, normalized to [0,1] at ingestion.
using Image = Raster<double>;

/// Binary region of interest, values in {0,1}.
using Mask = Raster<std::uint8_t>;

using Point2 = Eigen::Vector2d;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyMaskError : public Error {
 public:
  EmptyMaskError() : Error("mask has no foreground pixels") {}
  explicit EmptyMaskError(const std::string& what) : Error(what) {}
};

/// Result of sampling a raster at a continuous position. Out-of-domain samples
/// carry the background value 0 and `valid == false`.
struct Sample {
  double value = 0.0;
  bool valid = false;
};

/// Bilinear interpolation at continuous pixel coordinates (x along columns).
/// Pixel centres sit on integer coordinates; the domain is [0,w-1] x [0,h-1].
template <typename Derived>
Sample bilinear_sample(const Eigen::ArrayBase<Derived>& img, double x, double y) {
  const Eigen::Index w = img.cols();
  const Eigen::Index h = img.rows();
  if (!(x >= 0.0 && y >= 0.0 && x <= double(w - 1) && y <= double(h - 1))) {
    return {};
  }
  const Eigen::Index x0 = static_cast<Eigen::Index>(std::floor(x));
  const Eigen::Index y0 = static_cast<Eigen::Index>(std::floor(y));
  const double fx = x - double(x0);
  const double fy = y - double(y0);
  const Eigen::Index x1 = std::min(x0 + 1, w - 1);
  const Eigen::Index y1 = std::min(y0 + 1, h - 1);
  const double v00 = double(img(y0, x0));
  const double v01 = double(img(y0, x1));
  const double v10 = double(img(y1, x0));
  const double v11 = double(img(y1, x1));
  const double top = v00 + fx * (v01 - v00);
  const double bottom = v10 + fx * (v11 - v10);
  return {top + fy * (bottom - top), true};
}

/// Bilinear value plus its exact partial derivatives on the interpolating cell.
struct SampleGrad {
  double value = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  bool valid = false;
};

SampleGrad bilinear_sample_grad(const Image& img, double x, double y);

/// Separable Gaussian blur, kernel truncated at ceil(3 sigma) and renormalized,
/// edge-clamped borders. Throws std::invalid_argument for sigma <= 0.
Image gaussian_filter(const Image& img, double sigma);

/// The normalized 1-D kernel used by gaussian_filter (length 2*ceil(3 sigma)+1).
Eigen::ArrayXd gaussian_kernel(double sigma);

/// Central differences in the interior, one-sided at borders.
Image gradient_magnitude(const Image& img);

/// Output is ceil(w/2) x ceil(h/2); each pixel is the mean of its 2x2 block.
Image downsample_half(const Image& img);
Mask downsample_half(const Mask& mask);

/// Backward warp: out(p) = bilinear_sample(img, map(p)). `map` is any callable
/// Point2 -> Point2; invalid samples become 0.
template <typename Map>
Image warp(const Image& img, const Map& map) {
  Image out(img.rows(), img.cols());
  for (Eigen::Index y = 0; y < img.rows(); ++y) {
    for (Eigen::Index x = 0; x < img.cols(); ++x) {
      const Point2 q = map(Point2(double(x), double(y)));
      out(y, x) = bilinear_sample(img, q.x(), q.y()).value;
    }
  }
  return out;
}

/// Warps a mask by sampling it as a [0,1] field and thresholding at 0.5.
template <typename Map>
Mask warp_mask(const Mask& mask, const Map& map) {
  const Image field = mask.cast<double>();
  Mask out(mask.rows(), mask.cols());
  for (Eigen::Index y = 0; y < mask.rows(); ++y) {
    for (Eigen::Index x = 0; x < mask.cols(); ++x) {
      const Point2 q = map(Point2(double(x), double(y)));
      out(y, x) = bilinear_sample(field, q.x(), q.y()).value >= 0.5 ? 1 : 0;
    }
  }
  return out;
}

inline Eigen::Index foreground_count(const Mask& mask) { return (mask != 0).count(); }

/// Centroid of the foreground pixels (pixel-centre coordinates).
Point2 mask_centroid(const Mask& mask);

/// Inclusive bounding box of the foreground, as {x_min, y_min, x_max, y_max}.
Eigen::Array4i mask_bbox(const Mask& mask);

/// Largest 4-connected foreground component.
Mask largest_component(const Mask& mask);

/// Binary erosion with a disk-shaped structuring element of the given radius.
Mask erode(const Mask& mask, int radius);

}  // namespace pouchreg
