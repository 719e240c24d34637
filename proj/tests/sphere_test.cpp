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

#include "scankit/sphere.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

namespace scankit {
namespace {

void expect_vec_near(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

TEST(Parameterization, AxisAndPoleCases) {
  expect_vec_near(latlon_to_unit({0, 0}), {1, 0, 0}, 1e-15);
  expect_vec_near(latlon_to_unit({kHalfPi, 0}), {0, 0, 1}, 1e-15);
  expect_vec_near(latlon_to_unit({0, kHalfPi}), {0, 1, 0}, 1e-15);

  const GazePoint o = unit_to_latlon({1, 0, 0});
  EXPECT_EQ(o.lat, 0.0);
  EXPECT_EQ(o.lon, 0.0);
  const GazePoint north = unit_to_latlon({0, 0, 1});
  EXPECT_DOUBLE_EQ(north.lat, kHalfPi);
  EXPECT_EQ(north.lon, 0.0);
  const GazePoint south = unit_to_latlon({-0.0, -0.0, -1});
  EXPECT_DOUBLE_EQ(south.lat, -kHalfPi);
  EXPECT_EQ(south.lon, 0.0);
}

TEST(Parameterization, RejectsNonFinite) {
  EXPECT_THROW(unit_to_latlon({std::nan(""), 0, 1}), std::invalid_argument);
  EXPECT_THROW(unit_to_latlon({INFINITY, 0, 0}), std::invalid_argument);
}

TEST(Parameterization, RoundTripsRandomVectorsAndAngles) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lat(-kHalfPi + 1e-6, kHalfPi - 1e-6), lon(-kPi, kPi);
  for (int k = 0; k < 10000; ++k) {
    const UnitVec3 v = oracle::random_unit(rng);
    expect_vec_near(latlon_to_unit(unit_to_latlon(v)), v, 1e-12);
    const GazePoint p{lat(rng), lon(rng)};
    const GazePoint q = unit_to_latlon(latlon_to_unit(p));
    EXPECT_NEAR(q.lat, p.lat, 1e-12);
    EXPECT_NEAR(q.lon, p.lon, 1e-12);
    EXPECT_NEAR(latlon_to_unit(p).norm(), 1.0, 1e-12);
  }
}

TEST(Parameterization, ContinuousAcrossDateLine) {
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const double d = spherical_distance(latlon_to_unit({0, kPi - eps}), latlon_to_unit({0, -kPi + eps}));
    EXPECT_NEAR(d, 2 * eps, 1e-9);
  }
}

TEST(SphericalDistance, ClosedFormCases) {
  const UnitVec3 a{1, 0, 0};
  EXPECT_EQ(spherical_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(spherical_distance(a, {-1, 0, 0}), kPi);
  EXPECT_NEAR(spherical_distance(a, {0, 1, 0}), kHalfPi, 1e-15);
  // Chords a few ulps longer than 2 still clamp to pi.
  EXPECT_DOUBLE_EQ(spherical_distance({1 + 1e-15, 0, 0}, {-1 - 1e-15, 0, 0}), kPi);
}

TEST(SphericalDistance, MetricAxiomsAndIsometry) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 10000; ++k) {
    const UnitVec3 a = oracle::random_unit(rng), b = oracle::random_unit(rng), c = oracle::random_unit(rng);
    const double ab = spherical_distance(a, b), ba = spherical_distance(b, a);
    const double bc = spherical_distance(b, c), ac = spherical_distance(a, c);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, kPi);
    EXPECT_EQ(ab, ba);
    EXPECT_LE(ac, ab + bc + 1e-12);
    EXPECT_NEAR(ab, std::acos(std::clamp(a.dot(b), -1.0, 1.0)), 1e-9);
    const oracle::Rotation rot = oracle::random_rotation(rng);
    EXPECT_NEAR(spherical_distance(rot(a), rot(b)), ab, 1e-9);
  }
}

TEST(WrapLongitude, CanonicalRange) {
  EXPECT_DOUBLE_EQ(wrap_longitude(kPi), -kPi);
  EXPECT_DOUBLE_EQ(wrap_longitude(-kPi), -kPi);
  EXPECT_NEAR(wrap_longitude(3 * kPi + 0.25), -kPi + 0.25, 1e-12);
  EXPECT_NEAR(wrap_longitude(-0.5), -0.5, 1e-15);
}

TEST(Gnomonic, CenterMapsToOrigin) {
  const GazePoint c{0.3, -1.2};
  const TangentCoords t = gnomonic_project(c, c);
  EXPECT_NEAR(t.u, 0.0, 1e-15);
  EXPECT_NEAR(t.v, 0.0, 1e-15);
  const GazePoint back = gnomonic_unproject(c, {0, 0});
  EXPECT_EQ(back, c);
}

TEST(Gnomonic, EquatorialClosedForm) {
  for (double theta : {0.1, 0.7, 1.2, kHalfPi - 1e-3, kHalfPi - 1e-6}) {
    const TangentCoords t = gnomonic_project({0, 0}, {0, theta});
    EXPECT_NEAR(t.u / std::tan(theta), 1.0, 1e-9) << theta;
    EXPECT_NEAR(t.v, 0.0, 1e-12);
  }
  const GazePoint p = gnomonic_unproject({0, 0}, {1, 0});
  EXPECT_NEAR(p.lat, 0.0, 1e-15);
  EXPECT_NEAR(p.lon, kPi / 4, 1e-15);
}

TEST(Gnomonic, GreatCirclesThroughCenterStayStraight) {
  const GazePoint c{0.4, 2.0};
  const TangentBasis b = tangent_basis(c);
  const Vec3 dir = (b.east * 0.6 + b.north * 0.8).normalized();
  double slope = std::nan("");
  for (double ang : {0.1, 0.4, 0.9, 1.3}) {
    const UnitVec3 q = b.center * std::cos(ang) + dir * std::sin(ang);
    const TangentCoords t = gnomonic_project(c, unit_to_latlon(q));
    if (std::isnan(slope)) slope = t.v / t.u;
    EXPECT_NEAR(t.v / t.u, slope, 1e-9);
  }
  EXPECT_NEAR(slope, 0.8 / 0.6, 1e-9);
}

TEST(Gnomonic, RejectsBackHemisphere) {
  EXPECT_THROW(gnomonic_project({0, 0}, {0, kHalfPi + 0.01}), std::domain_error);
  EXPECT_THROW(gnomonic_project({0, 0}, {0, kPi}), std::domain_error);
}

TEST(Gnomonic, RandomRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lat(-1.5, 1.5), lon(-kPi, kPi), uv(-4, 4);
  for (int k = 0; k < 10000; ++k) {
    const GazePoint c{lat(rng), lon(rng)};
    const TangentCoords t{uv(rng), uv(rng)};
    const TangentCoords back = gnomonic_project(c, gnomonic_unproject(c, t));
    EXPECT_NEAR(back.u, t.u, 1e-9);
    EXPECT_NEAR(back.v, t.v, 1e-9);
  }
}

TEST(KernelGrid, SingleCellIsCenter) {
  const GazePoint c{0.2, 0.3};
  const auto g = spherical_kernel_grid(c, 1, 0.1);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0], c);
}

TEST(KernelGrid, EquatorMiddleRowEvenlySpaced) {
  const double step = 0.2;
  const auto g = spherical_kernel_grid({0, 1.0}, 3, step);
  ASSERT_EQ(g.size(), 9u);
  // Middle row sits on the equator, offset by atan(tan(step)) = step.
  EXPECT_NEAR(g[3].lat, 0.0, 1e-15);
  EXPECT_NEAR(g[5].lat, 0.0, 1e-15);
  EXPECT_NEAR(g[3].lon, 1.0 - step, 1e-12);
  EXPECT_EQ(g[4].lon, 1.0);
  EXPECT_NEAR(g[5].lon, 1.0 + step, 1e-12);
  // Middle column runs north-south; row 0 is north.
  EXPECT_NEAR(g[1].lat, step, 1e-12);
  EXPECT_NEAR(g[7].lat, -step, 1e-12);
}

TEST(KernelGrid, WiderInLongitudeNearPole) {
  const double step = 0.1;
  auto lon_extent = [&](double lat) {
    const auto g = spherical_kernel_grid({lat, 0.0}, 3, step);
    return std::abs(wrap_longitude(g[5].lon - g[3].lon));
  };
  EXPECT_GT(lon_extent(1.3), 2.0 * lon_extent(0.0));
  EXPECT_GT(lon_extent(0.8), lon_extent(0.0));
}

TEST(KernelGrid, Errors) {
  EXPECT_THROW(spherical_kernel_grid({0, 0}, 2, 0.1), std::invalid_argument);
  EXPECT_THROW(spherical_kernel_grid({0, 0}, 3, 0.0), std::invalid_argument);
  EXPECT_THROW(spherical_kernel_grid({0, 0}, 5, 0.4), std::domain_error);
}

TEST(Equirect, PixelCenterConvention) {
  const GazePoint mid = equirect_pixel_to_latlon(1, 2, 3, 5);
  EXPECT_NEAR(mid.lat, 0.0, 1e-15);
  EXPECT_NEAR(mid.lon, 0.0, 1e-15);
  const GazePoint corner = equirect_pixel_to_latlon(0, 0, 2, 4);
  EXPECT_DOUBLE_EQ(corner.lat, kPi / 4);
  EXPECT_DOUBLE_EQ(corner.lon, -3 * kPi / 4);
  EXPECT_THROW(equirect_pixel_to_latlon(2, 0, 2, 4), std::out_of_range);
  EXPECT_THROW(equirect_pixel_to_latlon(0, -1, 2, 4), std::out_of_range);
}

TEST(Equirect, InverseRoundTrip) {
  const int h = 37, w = 74;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const GazePoint p = equirect_pixel_to_latlon(r, c, h, w);
      EXPECT_EQ(latlon_to_equirect_pixel(p, h, w), (PixelIndex{r, c}));
      const RasterCoords rc = latlon_to_equirect(p, h, w);
      EXPECT_NEAR(rc.row, r, 1e-9);
      EXPECT_NEAR(rc.col, c, 1e-9);
    }
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> lat(-kHalfPi, kHalfPi), lon(-kPi, kPi);
  for (int k = 0; k < 1000; ++k) {
    const GazePoint p{lat(rng), lon(rng)};
    const PixelIndex px = latlon_to_equirect_pixel(p, h, w);
    const GazePoint q = equirect_pixel_to_latlon(px.row, px.col, h, w);
    EXPECT_LE(std::abs(q.lat - p.lat), 0.5 * kPi / h + 1e-12);
    EXPECT_LE(std::abs(wrap_longitude(q.lon - p.lon)), 0.5 * kTwoPi / w + 1e-12);
  }
}

TEST(Equirect, SolidAnglesTileTheSphere) {
  double total = 0;
  for (int r = 0; r < 45; ++r) total += 90 * equirect_pixel_solid_angle(r, 45, 90);
  EXPECT_NEAR(total, 4 * kPi, 1e-12);
}

}  // namespace
}  // namespace scankit
