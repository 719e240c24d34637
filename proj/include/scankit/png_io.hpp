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

// PNG decode and encode through libpng's simplified API. Link scankit_png.

#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scankit/format.hpp"
#include "scankit/grid.hpp"
#include "scankit/image.hpp"

namespace scankit {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 8-bit RGB decode to [0, 1]; alpha is composited onto black and gray is
/// expanded.
inline EquirectImage read_png(const std::string& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw ImageError("cannot read PNG '" + path + "': " + img.message);
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  png_color black{0, 0, 0};
  if (!png_image_finish_read(&img, &black, buf.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw ImageError("cannot decode PNG '" + path + "': " + msg);
  }
  EquirectImage out(static_cast<int>(img.height), static_cast<int>(img.width));
  for (std::size_t k = 0; k < buf.size(); ++k) out.pixels()[k] = buf[k] / 255.0;
  return out;
}

inline std::uint8_t to_byte(double v) {
  if (!(v > 0)) return 0;  // also maps NaN to 0
  return static_cast<std::uint8_t>(std::lround(std::min(v, 1.0) * 255.0));
}

inline void write_png(const std::string& path, const EquirectImage& image) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(image.pixels().size());
  for (std::size_t k = 0; k < buf.size(); ++k) buf[k] = to_byte(image.pixels()[k]);
  if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr))
    throw ImageError("cannot write PNG '" + path + "': " + img.message);
}

/// Map scaled by its maximum onto a black-red-yellow-white ramp.
inline EquirectImage heatmap_image(const Grid<double>& map) {
  double peak = 0.0;
  for (double v : map.values()) peak = std::max(peak, v);
  EquirectImage out(static_cast<int>(map.rows()), static_cast<int>(map.cols()));
  for (std::size_t r = 0; r < map.rows(); ++r)
    for (std::size_t c = 0; c < map.cols(); ++c) {
      const double x = peak > 0 ? 3.0 * map(r, c) / peak : 0.0;
      out.at(static_cast<int>(r), static_cast<int>(c), 0) = std::clamp(x, 0.0, 1.0);
      out.at(static_cast<int>(r), static_cast<int>(c), 1) = std::clamp(x - 1.0, 0.0, 1.0);
      out.at(static_cast<int>(r), static_cast<int>(c), 2) = std::clamp(x - 2.0, 0.0, 1.0);
    }
  return out;
}

/// Raw matrix as comma-separated rows, each value in shortest round-trip form.
inline void write_matrix_csv(const std::string& path, const Grid<double>& map) {
  std::ofstream os(path);
  if (!os) throw ImageError("cannot write '" + path + "'");
  for (std::size_t r = 0; r < map.rows(); ++r) {
    for (std::size_t c = 0; c < map.cols(); ++c) os << (c ? "," : "") << format_double(map(r, c));
    os << "\n";
  }
}

}  // namespace scankit
