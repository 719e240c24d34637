// Copyright 2026 The scankit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ==============================================================================

// Equirectangular RGB panoramas and the raster operations the rest of the
// library needs: bilinear sampling with longitude wrap, resizing, and
// column rolls (longitude shifts).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "scankit/sphere.hpp"

namespace scankit {

/// H x W x 3 panorama, channel-interleaved, values in [0, 1].
class EquirectImage {
 public:
  static constexpr int kChannels = 3;

  EquirectImage() = default;
  EquirectImage(int height, int width, double fill = 0.0) : height_(height), width_(width) {
    if (height <= 0 || width <= 0) throw std::invalid_argument("EquirectImage: empty raster");
    pixels_.assign(static_cast<std::size_t>(height) * width * kChannels, fill);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return pixels_.empty(); }

  double& at(int row, int col, int ch) { return pixels_[index(row, col, ch)]; }
  double at(int row, int col, int ch) const { return pixels_[index(row, col, ch)]; }

  const std::vector<double>& pixels() const { return pixels_; }
  std::vector<double>& pixels() { return pixels_; }

  bool operator==(const EquirectImage&) const = default;

 private:
  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width_ + col) * kChannels + ch;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> pixels_;
};

/// Bilinear lookup at continuous raster coordinates (pixel centers at
/// integers). Columns wrap around the date line, rows clamp at the poles.
inline double sample_bilinear(const EquirectImage& img, RasterCoords rc, int ch) {
  const int h = img.height(), w = img.width();
  const double row = std::clamp(rc.row, 0.0, static_cast<double>(h - 1));
  const int r0 = std::min(static_cast<int>(std::floor(row)), h - 1);
  const int r1 = std::min(r0 + 1, h - 1);
  const double fr = row - r0;
  const double cf = std::floor(rc.col);
  const double fc = rc.col - cf;
  const int c0 = ((static_cast<int>(cf) % w) + w) % w;
  const int c1 = (c0 + 1) % w;
  return (1 - fr) * ((1 - fc) * img.at(r0, c0, ch) + fc * img.at(r0, c1, ch)) +
         fr * ((1 - fc) * img.at(r1, c0, ch) + fc * img.at(r1, c1, ch));
}

inline double sample_bilinear(const EquirectImage& img, GazePoint p, int ch) {
  return sample_bilinear(img, latlon_to_equirect(p, img.height(), img.width()), ch);
}

/// Resampling on the sphere: every output pixel center reads the input at
/// the same latitude/longitude.
inline EquirectImage resize_equirect(const EquirectImage& img, int height, int width) {
  if (img.height() == height && img.width() == width) return img;
  EquirectImage out(height, width);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const GazePoint p = equirect_pixel_to_latlon(r, c, height, width);
      const RasterCoords rc = latlon_to_equirect(p, img.height(), img.width());
      for (int ch = 0; ch < EquirectImage::kChannels; ++ch) out.at(r, c, ch) = sample_bilinear(img, rc, ch);
    }
  return out;
}

/// Enforces the 2:1 equirectangular aspect by resampling the width.
inline EquirectImage enforce_equirect_aspect(const EquirectImage& img) {
  if (img.width() == 2 * img.height()) return img;
  return resize_equirect(img, img.height(), 2 * img.height());
}

/// Rolls columns east by `offset` pixels: content at longitude lon moves to
/// lon + offset * 2pi / W.
inline EquirectImage roll_columns(const EquirectImage& img, int offset) {
  const int w = img.width();
  const int k = ((offset % w) + w) % w;
  if (k == 0) return img;
  EquirectImage out(img.height(), w);
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < EquirectImage::kChannels; ++ch) out.at(r, (c + k) % w, ch) = img.at(r, c, ch);
  return out;
}

}  // namespace scankit
