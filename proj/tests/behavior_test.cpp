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

#include "scankit/behavior.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

namespace scankit {
namespace {

UnitVec3 pixel_center(int row, int col, int h, int w) { return latlon_to_unit(equirect_pixel_to_latlon(row, col, h, w)); }

ScanpathSet set_of(std::vector<Scanpath> sps) {
  ScanpathSet s;
  s.image_id = "img";
  s.scanpaths = std::move(sps);
  return s;
}

Scanpath equator_sweep(double start_deg, double deg_per_s, std::size_t n) {
  Scanpath sp;
  for (std::size_t t = 0; t < n; ++t) sp.points.push_back(latlon_to_unit({0.0, deg_to_rad(start_deg + deg_per_s * t)}));
  return sp;
}

double sum(const Grid<double>& g) {
  double s = 0;
  for (double v : g.values()) s += v;
  return s;
}

TEST(AggregateMap, SinglePointIsDelta) {
  const ScanpathSet s = set_of({Scanpath{{pixel_center(3, 7, 16, 32)}}});
  const AggregateMap m = aggregate_map(s, 16, 32, 0.0);
  for (std::size_t r = 0; r < 16; ++r)
    for (std::size_t c = 0; c < 32; ++c) EXPECT_EQ(m(r, c), (r == 3 && c == 7) ? 1.0 : 0.0);
}

TEST(AggregateMap, SumsToOneAndWrapsLongitude) {
  std::mt19937_64 rng(1);
  for (double sigma : {0.0, 2.0, 10.0, 40.0}) {
    std::vector<Scanpath> sps;
    for (int k = 0; k < 7; ++k) sps.push_back(oracle::random_walk(rng, 30, 0.2));
    EXPECT_NEAR(sum(aggregate_map(set_of(sps), 24, 48, sigma)), 1.0, 1e-9) << sigma;
  }
  // Blur mass near the date line lands on both edges.
  const AggregateMap m = aggregate_map(set_of({Scanpath{{pixel_center(8, 0, 16, 32)}}}), 16, 32, 15.0);
  EXPECT_GT(m(8, 31), 0.0);
  EXPECT_NEAR(m(8, 31), m(8, 1), 1e-15);
}

TEST(AggregateMap, UniformPointsFollowSolidAngleProfile) {
  std::mt19937_64 rng(2);
  const int h = 18, w = 36;
  const std::size_t n = 100000;
  Scanpath sp;
  for (std::size_t k = 0; k < n; ++k) sp.points.push_back(oracle::random_unit(rng));
  const std::vector<double> marginal = latitude_marginal(aggregate_map(set_of({sp}), h, w, 0.0));
  for (int r = 0; r < h; ++r) {
    const double expected = equirect_pixel_solid_angle(r, h, w) * w / (4 * kPi);
    const double sd = std::sqrt(expected * (1 - expected) / n);
    EXPECT_NEAR(marginal[static_cast<std::size_t>(r)], expected, 4.5 * sd) << "row " << r;
  }
}

TEST(AggregateMap, CommutesWithPixelShiftsExactly) {
  std::mt19937_64 rng(3);
  const int h = 32, w = 64;
  std::vector<Scanpath> sps(5);
  for (auto& sp : sps)
    for (int t = 0; t < 30; ++t)
      sp.points.push_back(pixel_center(static_cast<int>(uniform_index(rng, h)), static_cast<int>(uniform_index(rng, w)), h, w));
  const int shift = 11;
  std::vector<Scanpath> shifted = sps;
  for (auto& sp : shifted)
    for (auto& p : sp.points) p = rotate_about_z(p, kTwoPi * shift / w);
  const AggregateMap a = aggregate_map(set_of(sps), h, w, 6.0);
  const AggregateMap b = aggregate_map(set_of(shifted), h, w, 6.0);
  for (std::size_t r = 0; r < static_cast<std::size_t>(h); ++r)
    for (std::size_t c = 0; c < static_cast<std::size_t>(w); ++c) EXPECT_EQ(b(r, (c + shift) % w), a(r, c));
  std::vector<Scanpath> reversed(sps.rbegin(), sps.rend());
  EXPECT_EQ(aggregate_map(set_of(reversed), h, w, 6.0), a);
}

TEST(Kde, IntegratesToOneAndPeaksAtPoint) {
  const int h = 90, w = 180;
  const GazePoint center = equirect_pixel_to_latlon(30, 50, h, w);
  const ScanpathSet s = set_of({Scanpath{{latlon_to_unit(center), latlon_to_unit({0.1, 0.2})}}});
  const DensityMap d = kde_timestamp(s, 0.0, 80.0, h, w);
  EXPECT_NEAR(sphere_integral(d.density), 1.0, 1e-12);
  // The cos(lat) dlat dlon approximation agrees to 1e-3.
  double approx = 0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      approx += d.density(r, c) * std::cos(equirect_pixel_to_latlon(r, c, h, w).lat) * (kPi / h) * (kTwoPi / w);
  EXPECT_NEAR(approx, 1.0, 1e-3);
  const ModeAndSpread ms = kde_mode_and_spread(d);
  EXPECT_EQ(ms.pixel, (PixelIndex{30, 50}));
  EXPECT_NEAR(spherical_distance(ms.mode, center), 0.0, 1e-12);
  // Second timestamp uses the second point.
  const ModeAndSpread second = kde_mode_and_spread(kde_timestamp(s, 1.0, 80.0, h, w));
  EXPECT_LT(spherical_distance(second.mode, GazePoint{0.1, 0.2}), deg_to_rad(1.5));
  EXPECT_THROW(kde_timestamp(s, 2.0, 80.0, h, w), std::out_of_range);
  EXPECT_THROW(kde_timestamp(s, -1.0, 80.0, h, w), std::out_of_range);
}

TEST(Kde, MatchesAnalyticVmf) {
  const int h = 90, w = 180;
  const UnitVec3 mu = latlon_to_unit({0.3, -1.0});
  const DensityMap d = kde_timestamp(set_of({Scanpath{{mu}}}), 0.0, 20.0, h, w);
  for (int r = 0; r < h; r += 7)
    for (int c = 0; c < w; c += 11)
      EXPECT_NEAR(d.density(r, c), von_mises_fisher_pdf(mu, pixel_center(r, c, h, w), 20.0), 2e-3 * von_mises_fisher_pdf(mu, mu, 20.0));
}

TEST(Kde, EntropyDecreasesWithKappa) {
  std::mt19937_64 rng(4);
  std::vector<Scanpath> sps;
  for (int k = 0; k < 6; ++k) sps.push_back(oracle::random_scanpath(rng, 3));
  double prev = std::log(4 * kPi) + 1e-9;
  for (double kappa : {1.0, 5.0, 20.0, 80.0, 320.0}) {
    const double e = density_entropy(kde_timestamp(set_of(sps), 1.0, kappa, 90, 180));
    EXPECT_LT(e, prev) << kappa;
    prev = e;
  }
}

TEST(Kde, ModeTieBreaksToLowestIndex) {
  DensityMap d{Grid<double>(4, 8, 0.0), 80.0};
  d.density(2, 5) = 3.0;
  d.density(1, 6) = 3.0;
  d.density(2, 1) = 3.0;
  EXPECT_EQ(kde_mode_and_spread(d).pixel, (PixelIndex{1, 6}));
  DensityMap flat{Grid<double>(4, 8, 1.0), 80.0};
  EXPECT_EQ(kde_mode_and_spread(flat).pixel, (PixelIndex{0, 0}));
}

TEST(Kde, SpreadMatchesMonteCarlo) {
  const int h = 180, w = 360;
  std::mt19937_64 rng(5);
  for (double kappa : {20.0, 80.0}) {
    const UnitVec3 mu = pixel_center(80, 100, h, w);
    const ModeAndSpread ms = kde_mode_and_spread(kde_timestamp(set_of({Scanpath{{mu}}}), 0.0, kappa, h, w));
    double mc = 0;
    const int samples = 200000;
    for (int k = 0; k < samples; ++k) mc += spherical_distance(mu, oracle::sample_vmf(rng, mu, kappa));
    mc /= samples;
    EXPECT_NEAR(ms.spread, mc, 0.02 * mc) << kappa;
  }
}

TEST(Kde, ZeroSpreadForIdenticalPoints) {
  const UnitVec3 p = pixel_center(20, 20, 90, 180);
  const ModeAndSpread a = kde_mode_and_spread(kde_timestamp(set_of({Scanpath{{p}}, Scanpath{{p}}}), 0.0, 2000.0, 90, 180));
  const ModeAndSpread b = kde_mode_and_spread(kde_timestamp(set_of({Scanpath{{p}}}), 0.0, 80.0, 90, 180));
  EXPECT_LT(a.spread, b.spread);
  EXPECT_LT(a.spread, deg_to_rad(2.0));
}

TEST(StartRegion, Partitions) {
  std::vector<Scanpath> at_zero(4, Scanpath{{latlon_to_unit({0.2, 0.0})}});
  const auto one = start_region_partition(set_of(at_zero));
  ASSERT_EQ(one.size(), 9u);
  int nonempty = 0;
  for (const auto& g : one) nonempty += !g.scanpaths.empty();
  EXPECT_EQ(nonempty, 1);
  EXPECT_EQ(one[4].scanpaths.size(), 4u);
  EXPECT_EQ(one[4].lon_begin_deg, -20.0);

  EXPECT_EQ(start_region_partition(set_of(at_zero), 360.0).size(), 1u);

  std::vector<Scanpath> spread;
  for (double lon = -170; lon <= 170; lon += 40) spread.push_back(Scanpath{{latlon_to_unit({0.0, deg_to_rad(lon)})}});
  const auto groups = start_region_partition(set_of(spread));
  ASSERT_EQ(groups.size(), 9u);
  for (const auto& g : groups) EXPECT_EQ(g.scanpaths.size(), 1u) << g.lon_begin_deg;
  EXPECT_THROW(start_region_partition(set_of(spread), 0.0), std::invalid_argument);
}

TEST(Exploration, StationaryReachesOnlyZero) {
  const ExplorationCurve c = exploration_time(set_of({Scanpath{std::vector<UnitVec3>(30, latlon_to_unit({0.1, 0.4}))}}));
  ASSERT_EQ(c.offsets_deg.size(), 10u);
  EXPECT_EQ(c.mean_time[0], 0.0);
  EXPECT_EQ(c.coverage[0], 1.0);
  for (std::size_t k = 1; k < 10; ++k) {
    EXPECT_TRUE(std::isnan(c.mean_time[k]));
    EXPECT_EQ(c.coverage[k], 0.0);
  }
}

TEST(Exploration, ConstantSweepIsExact) {
  const ExplorationCurve c = exploration_time(set_of({equator_sweep(-30.0, 12.0, 30)}));
  for (std::size_t k = 0; k < c.offsets_deg.size(); ++k) {
    EXPECT_NEAR(c.mean_time[k], c.offsets_deg[k] / 12.0, 1e-9) << c.offsets_deg[k];
    EXPECT_EQ(c.coverage[k], 1.0);
  }
}

TEST(Exploration, CrossesDateLine) {
  const ExplorationCurve c = exploration_time(set_of({equator_sweep(170.0, 10.0, 6)}), {0, 20, 40, 60});
  EXPECT_NEAR(c.mean_time[1], 2.0, 1e-9);
  EXPECT_NEAR(c.mean_time[2], 4.0, 1e-9);
  EXPECT_TRUE(std::isnan(c.mean_time[3]));
}

TEST(Exploration, CensoringAndMonotonicity) {
  std::mt19937_64 rng(6);
  std::vector<Scanpath> sps{equator_sweep(0, 12, 30), equator_sweep(0, 3, 30)};
  for (int k = 0; k < 20; ++k) sps.push_back(oracle::random_walk(rng, 30, 0.3));
  const ExplorationCurve c = exploration_time(set_of(sps));
  EXPECT_NEAR(c.coverage[5], (1.0 + [&] {
    int n = 0;
    for (std::size_t i = 2; i < sps.size(); ++i) n += !std::isnan(c.per_scanpath[i][5]);
    return n;
  }()) / sps.size(), 1e-15);
  for (const auto& row : c.per_scanpath) {
    double prev = -1;
    for (double t : row) {
      if (std::isnan(t)) {
        prev = std::numeric_limits<double>::infinity();
        continue;
      }
      EXPECT_GE(t, prev);
      prev = t;
    }
  }
  // Only the fast sweep gets to 100 degrees; the slow one stops at 87.
  EXPECT_TRUE(std::isnan(c.per_scanpath[1][5]));
  EXPECT_NEAR(c.per_scanpath[1][4], 80.0 / 3.0, 1e-9);
}

TEST(Roc, EndpointsAndIdenticalScanpaths) {
  const UnitVec3 p = pixel_center(10, 20, 32, 64);
  std::vector<Scanpath> same(5, Scanpath{std::vector<UnitVec3>(30, p)});
  const RocCurve c = roc_congruency(set_of(same), {32, 64, 0.0, {}, 1});
  ASSERT_EQ(c.salient_percent.size(), 101u);
  EXPECT_EQ(c.salient_percent.front(), 0.0);
  EXPECT_EQ(c.hit_rate.front(), 0.0);
  EXPECT_EQ(c.salient_percent.back(), 100.0);
  EXPECT_EQ(c.hit_rate.back(), 100.0);
  for (std::size_t k = 1; k < c.hit_rate.size(); ++k) EXPECT_EQ(c.hit_rate[k], 100.0);
}

TEST(Roc, UniformScanpathsFollowDiagonal) {
  std::mt19937_64 rng(7);
  std::vector<Scanpath> sps;
  for (int k = 0; k < 200; ++k) sps.push_back(oracle::random_scanpath(rng, 30));
  const RocCurve c = roc_congruency(set_of(sps), {32, 64, 8.0, {}, 4});
  for (std::size_t k = 0; k < c.salient_percent.size(); ++k) {
    EXPECT_NEAR(c.hit_rate[k], c.salient_percent[k], 5.0) << c.salient_percent[k];
    if (k) {
      EXPECT_GE(c.hit_rate[k], c.hit_rate[k - 1]);
    }
  }
  EXPECT_NEAR(roc_area(c), 0.5, 0.05);
  for (const auto& curve : c.per_scanpath)
    for (std::size_t k = 1; k < curve.size(); ++k) EXPECT_GE(curve[k], curve[k - 1]);
  const RocCurve serial = roc_congruency(set_of(sps), {32, 64, 8.0, {}, 1});
  EXPECT_EQ(serial.hit_rate, c.hit_rate);
}

TEST(Roc, ClusteredScanpathsAreCongruent) {
  std::mt19937_64 rng(8);
  const UnitVec3 mu = latlon_to_unit({0.2, 1.0});
  std::vector<Scanpath> sps(20);
  for (auto& sp : sps)
    for (int t = 0; t < 30; ++t) sp.points.push_back(oracle::sample_vmf(rng, mu, 200.0));
  const RocCurve c = roc_congruency(set_of(sps), {32, 64, 4.0, {1, 5, 10, 50}, 1});
  ASSERT_EQ(c.salient_percent, (std::vector<double>{0, 1, 5, 10, 50, 100}));
  EXPECT_GT(c.hit_rate[2], 80.0);
  EXPECT_GT(roc_area(c), 0.9);
  EXPECT_THROW(roc_congruency(set_of({sps[0]})), std::invalid_argument);
  EXPECT_THROW(roc_congruency(set_of(sps), {32, 64, 4.0, {10, 5}, 1}), std::invalid_argument);
}

}  // namespace
}  // namespace scankit
