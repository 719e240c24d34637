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

#include "scankit/thumbnail.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

namespace scankit {
namespace {

UnitVec3 pixel_center(int row, int col, int h, int w) { return latlon_to_unit(equirect_pixel_to_latlon(row, col, h, w)); }

ScanpathSet repeat(const Scanpath& sp, std::size_t n) {
  ScanpathSet s;
  s.scanpaths.assign(n, sp);
  return s;
}

TEST(Trajectory, IdenticalScanpathsAreFollowedAtMinimumFov) {
  ThumbnailConfig cfg;
  Scanpath sp;
  // Two degrees per frame along pixel centers of the 90 x 180 KDE raster.
  for (int k = 0; k < 30; ++k) sp.points.push_back(pixel_center(40, 60 + k, 90, 180));
  const auto frames = trajectory_from_scanpaths(repeat(sp, 10), cfg);
  ASSERT_EQ(frames.size(), 30u);
  for (std::size_t k = 0; k < 30; ++k) {
    EXPECT_LT(spherical_distance(latlon_to_unit(frames[k].center), sp[k]), 1e-12) << k;
    EXPECT_NEAR(frames[k].fov_deg, cfg.fov_min, 1e-9);
    EXPECT_EQ(frames[k].t, static_cast<double>(k));
  }
}

TEST(Trajectory, StaysOnDominantModeNotBetweenClusters) {
  std::mt19937_64 rng(1);
  const UnitVec3 a = latlon_to_unit({0.0, -1.0}), b = latlon_to_unit({0.0, 1.0});
  ScanpathSet s;
  for (int k = 0; k < 60; ++k) {
    Scanpath sp;
    const bool major = k < 40;
    for (int t = 0; t < 10; ++t) sp.points.push_back(oracle::sample_vmf(rng, major ? a : b, 400.0));
    s.scanpaths.push_back(sp);
  }
  ThumbnailConfig cfg;
  const auto frames = trajectory_from_scanpaths(s, cfg);
  for (const auto& f : frames) {
    EXPECT_LT(spherical_distance(latlon_to_unit(f.center), a), deg_to_rad(5.0));
    EXPECT_GE(f.fov_deg, cfg.fov_min);
    EXPECT_LE(f.fov_deg, cfg.fov_max);
  }
}

TEST(Trajectory, PanRateAndFovBounds) {
  std::mt19937_64 rng(2);
  ScanpathSet s;
  for (int k = 0; k < 25; ++k) s.scanpaths.push_back(oracle::random_walk(rng, 30, 0.6));
  ThumbnailConfig cfg;
  cfg.max_pan_deg_per_s = 12.0;
  const auto frames = trajectory_from_scanpaths(s, cfg);
  for (std::size_t k = 1; k < frames.size(); ++k)
    EXPECT_LE(spherical_distance(frames[k].center, frames[k - 1].center), deg_to_rad(12.0) + 1e-9);
  for (const auto& f : frames) {
    EXPECT_GE(f.fov_deg, cfg.fov_min);
    EXPECT_LE(f.fov_deg, cfg.fov_max);
  }
  // Random gaze disagrees a lot, so the view opens up.
  EXPECT_GT(frames[15].fov_deg, 60.0);
}

TEST(Trajectory, UpsamplingKeepsKeyframes) {
  std::vector<TrajectoryFrame> frames{{0.0, {0.0, 0.0}, 30.0}, {1.0, {0.0, 0.2}, 50.0}};
  const auto up = upsample_trajectory(frames, 4);
  ASSERT_EQ(up.size(), 5u);
  EXPECT_NEAR(up[2].center.lon, 0.1, 1e-12);
  EXPECT_NEAR(up[2].fov_deg, 40.0, 1e-12);
  EXPECT_NEAR(up[2].t, 0.5, 1e-12);
  EXPECT_EQ(up.back().center.lon, 0.2);
}

EquirectImage gradient_panorama(int h, int w) {
  EquirectImage img(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      img.at(r, c, 0) = static_cast<double>(c) / w;
      img.at(r, c, 1) = static_cast<double>(r) / h;
      img.at(r, c, 2) = ((r / 4 + c / 4) % 2) ? 1.0 : 0.0;
    }
  return img;
}

TEST(Viewport, CenterPixelSamplesViewCenter) {
  const EquirectImage pano = gradient_panorama(90, 180);
  const EquirectImage view = render_viewport(pano, {0, {0.0, 0.0}, 60.0}, 41, 61);
  for (int ch = 0; ch < 3; ++ch) EXPECT_NEAR(view.at(20, 30, ch), sample_bilinear(pano, GazePoint{0.0, 0.0}, ch), 1e-12);
}

TEST(Viewport, MarkerLandsAtProjectedPosition) {
  const int h = 180, w = 360;
  const GazePoint center{deg_to_rad(20.0), deg_to_rad(170.0)};
  const int vh = 81, vw = 121;
  const double fov = 70.0;
  for (auto [mr, mc] : {std::pair{60, 340}, std::pair{75, 5}, std::pair{50, 355}}) {
    EquirectImage pano(h, w);
    pano.at(mr, mc, 0) = 1.0;
    const EquirectImage view = render_viewport(pano, {0, center, fov}, vh, vw);
    int br = 0, bc = 0;
    for (int r = 0; r < vh; ++r)
      for (int c = 0; c < vw; ++c)
        if (view.at(r, c, 0) > view.at(br, bc, 0)) br = r, bc = c;
    const TangentCoords tc = gnomonic_project(center, equirect_pixel_to_latlon(mr, mc, h, w));
    const double f = 0.5 * vw / std::tan(0.5 * deg_to_rad(fov));
    const double col = tc.u * f + 0.5 * vw - 0.5, row = 0.5 * vh - tc.v * f - 0.5;
    EXPECT_LE(std::abs(col - bc), 1.0) << mr << "," << mc;
    EXPECT_LE(std::abs(row - br), 1.0) << mr << "," << mc;
  }
}

TEST(Viewport, LongitudeShiftEquivariance) {
  const EquirectImage pano = gradient_panorama(64, 128);
  const int shift = 37;
  const EquirectImage rolled = roll_columns(pano, shift);
  const TrajectoryFrame f{0, {0.3, 2.9}, 80.0};
  const TrajectoryFrame g{0, {0.3, wrap_longitude(2.9 + kTwoPi * shift / 128)}, 80.0};
  const EquirectImage a = render_viewport(pano, f, 30, 40), b = render_viewport(rolled, g, 30, 40);
  for (std::size_t k = 0; k < a.pixels().size(); ++k) EXPECT_NEAR(a.pixels()[k], b.pixels()[k], 1e-9);
  EXPECT_THROW(render_viewport(pano, {0, {0, 0}, 180.0}, 10, 10), std::invalid_argument);
}

TEST(Thumbnail, EndToEndFromModel) {
  const ScanGan m = ScanGan::create(ModelConfig{}, 5);
  ThumbnailConfig cfg;
  cfg.n = 12;
  cfg.seed = 3;
  cfg.kde_height = 45;
  cfg.kde_width = 90;
  const auto a = thumbnail_trajectory(gradient_panorama(64, 128), m, cfg);
  const auto b = thumbnail_trajectory(gradient_panorama(64, 128), m, cfg);
  ASSERT_EQ(a.size(), kCanonicalScanpathLength);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].center.lat, b[k].center.lat);
    EXPECT_EQ(a[k].fov_deg, b[k].fov_deg);
  }
}

}  // namespace
}  // namespace scankit
