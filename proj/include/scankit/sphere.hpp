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

// Unit-sphere parameterization of gaze, the great-circle ground distance, and
// the gnomonic / equirectangular projection primitives shared by every other
// header in this library.
//
// Conventions:
//   lat in [-pi/2, pi/2] (north positive), lon in [-pi, pi).
//   x = cos(lat) cos(lon), y = cos(lat) sin(lon), z = sin(lat).
//   Equirectangular rasters: row 0 touches the north pole, col 0 starts at
//   lon = -pi, and every pixel is sampled at its center.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace scankit {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHalfPi = 0.5 * std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3&) const = default;

  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  constexpr Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    const double n = norm();
    return {x / n, y / n, z / n};
  }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

/// Point on the unit sphere. Same layout as Vec3; the unit-norm invariant is
/// the caller's responsibility (see is_unit()).
using UnitVec3 = Vec3;

inline bool is_unit(const Vec3& v, double tol = 1e-9) {
  return v.finite() && std::abs(v.dot(v) - 1.0) <= tol;
}

struct GazePoint {
  double lat = 0.0;
  double lon = 0.0;
  constexpr bool operator==(const GazePoint&) const = default;
};

/// Gnomonic tangent-plane coordinates; u points east, v points north.
struct TangentCoords {
  double u = 0.0;
  double v = 0.0;
};

inline constexpr std::size_t kCanonicalScanpathLength = 30;

/// Ordered gaze samples on the unit sphere, uniformly spaced in time.
struct Scanpath {
  std::vector<UnitVec3> points;
  double sample_rate_hz = 1.0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const UnitVec3& operator[](std::size_t i) const { return points[i]; }
  UnitVec3& operator[](std::size_t i) { return points[i]; }
  double time_of(std::size_t i) const { return static_cast<double>(i) / sample_rate_hz; }
};

/// Wraps a longitude into [-pi, pi).
inline double wrap_longitude(double lon) {
  double w = std::fmod(lon + kPi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  w -= kPi;
  // fmod can land exactly on +pi after the shift for inputs like -pi - 0.
  return w >= kPi ? w - kTwoPi : w;
}

inline UnitVec3 latlon_to_unit(GazePoint p) {
  const double c = std::cos(p.lat);
  return {c * std::cos(p.lon), c * std::sin(p.lon), std::sin(p.lat)};
}

/// Inverse parameterization. Longitude is 0 on the polar axis.
inline GazePoint unit_to_latlon(const UnitVec3& v) {
  if (!v.finite()) throw std::invalid_argument("unit_to_latlon: non-finite component");
  const double rho = std::hypot(v.x, v.y);
  const double lat = std::atan2(v.z, rho);
  if (rho == 0.0) return {lat, 0.0};
  double lon = std::atan2(v.y, v.x);
  if (lon >= kPi) lon -= kTwoPi;
  return {lat, lon};
}

/// Great-circle distance 2 asin(|a - b| / 2), in radians. The asin argument is
/// clamped so chords a few ulps above 2 still map to pi.
inline double spherical_distance(const UnitVec3& a, const UnitVec3& b) {
  const double half_chord = 0.5 * (a - b).norm();
  return 2.0 * std::asin(std::clamp(half_chord, -1.0, 1.0));
}

inline double spherical_distance(GazePoint a, GazePoint b) {
  return spherical_distance(latlon_to_unit(a), latlon_to_unit(b));
}

/// Rotation of `v` about the polar axis by `angle` radians (a pure longitude shift).
inline UnitVec3 rotate_about_z(const UnitVec3& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

struct TangentBasis {
  UnitVec3 center;
  Vec3 east;
  Vec3 north;
};

inline TangentBasis tangent_basis(GazePoint center) {
  const double sl = std::sin(center.lat), cl = std::cos(center.lat);
  const double so = std::sin(center.lon), co = std::cos(center.lon);
  return {{cl * co, cl * so, sl}, {-so, co, 0.0}, {-sl * co, -sl * so, cl}};
}

/// Gnomonic (central) projection of `p` onto the plane tangent at `center`.
/// Throws std::domain_error when `p` is not strictly inside the hemisphere
/// facing `center`.
inline TangentCoords gnomonic_project(GazePoint center, GazePoint p) {
  const TangentBasis b = tangent_basis(center);
  const UnitVec3 q = latlon_to_unit(p);
  const double cos_c = q.dot(b.center);
  if (!(cos_c > 0.0))
    throw std::domain_error("gnomonic_project: point outside the tangent hemisphere");
  return {q.dot(b.east) / cos_c, q.dot(b.north) / cos_c};
}

inline GazePoint gnomonic_unproject(GazePoint center, TangentCoords t) {
  if (t.u == 0.0 && t.v == 0.0) return center;
  const TangentBasis b = tangent_basis(center);
  const Vec3 ray = b.center + b.east * t.u + b.north * t.v;
  GazePoint p = unit_to_latlon(ray.normalized());
  p.lon = wrap_longitude(p.lon);
  return p;
}

/// k x k sampling locations of a distortion-aware kernel centered at `center`:
/// a regular tangent-plane lattice with pitch tan(angular_step), unprojected
/// back to the sphere. Row-major, row 0 is the northmost row, column 0 the
/// westmost.
inline std::vector<GazePoint> spherical_kernel_grid(GazePoint center, int k, double angular_step) {
  if (k <= 0 || k % 2 == 0)
    throw std::invalid_argument("spherical_kernel_grid: kernel size must be odd and positive");
  if (!(angular_step > 0.0))
    throw std::invalid_argument("spherical_kernel_grid: angular step must be positive");
  if (!(k * angular_step < kHalfPi))
    throw std::domain_error("spherical_kernel_grid: kernel extent exceeds the hemisphere");
  const double pitch = std::tan(angular_step);
  const int half = k / 2;
  std::vector<GazePoint> grid;
  grid.reserve(static_cast<std::size_t>(k) * k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      const TangentCoords t{(c - half) * pitch, (half - r) * pitch};
      grid.push_back(gnomonic_unproject(center, t));
    }
  }
  return grid;
}

struct PixelIndex {
  int row = 0;
  int col = 0;
  constexpr bool operator==(const PixelIndex&) const = default;
};

inline GazePoint equirect_pixel_to_latlon(int row, int col, int height, int width) {
  if (height <= 0 || width <= 0)
    throw std::invalid_argument("equirect_pixel_to_latlon: empty raster");
  if (row < 0 || row >= height || col < 0 || col >= width)
    throw std::out_of_range("equirect_pixel_to_latlon: pixel (" + std::to_string(row) + ", " +
                            std::to_string(col) + ") outside raster");
  const double lon = ((col + 0.5) / width) * kTwoPi - kPi;
  const double lat = kHalfPi - ((row + 0.5) / height) * kPi;
  return {lat, lon};
}

/// Continuous raster coordinates (pixel centers at integers) of a direction.
struct RasterCoords {
  double row = 0.0;
  double col = 0.0;
};

inline RasterCoords latlon_to_equirect(GazePoint p, int height, int width) {
  return {(kHalfPi - p.lat) / kPi * height - 0.5, (p.lon + kPi) / kTwoPi * width - 0.5};
}

/// Pixel that contains `p`. Columns wrap; rows clamp at the poles.
inline PixelIndex latlon_to_equirect_pixel(GazePoint p, int height, int width) {
  if (height <= 0 || width <= 0)
    throw std::invalid_argument("latlon_to_equirect_pixel: empty raster");
  int row = static_cast<int>(std::floor((kHalfPi - p.lat) / kPi * height));
  int col = static_cast<int>(std::floor((wrap_longitude(p.lon) + kPi) / kTwoPi * width));
  row = std::clamp(row, 0, height - 1);
  col = ((col % width) + width) % width;
  return {row, col};
}

/// Solid angle of one pixel in row `row` of an equirectangular H x W raster.
inline double equirect_pixel_solid_angle(int row, int height, int width) {
  const double north = kHalfPi - (static_cast<double>(row) / height) * kPi;
  const double south = kHalfPi - (static_cast<double>(row + 1) / height) * kPi;
  return (std::sin(north) - std::sin(south)) * (kTwoPi / width);
}

}  // namespace scankit
