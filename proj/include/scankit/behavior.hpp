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

// Behavioral analyses over scanpath sets: aggregate maps, per-timestamp
// spherical KDE, start-region grouping, exploration time and inter-observer
// ROC congruency.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "scankit/grid.hpp"
#include "scankit/metrics.hpp"
#include "scankit/sphere.hpp"

namespace scankit {

/// Nonnegative equirect map summing to one.
using AggregateMap = Grid<double>;

struct DensityMap {
  Grid<double> density;  ///< per steradian, at pixel centers
  double kappa = 0.0;
};

/// Solid angle of every row of an H x W equirect raster.
inline std::vector<double> row_solid_angles(int height, int width) {
  std::vector<double> out(static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r) out[static_cast<std::size_t>(r)] = equirect_pixel_solid_angle(r, height, width);
  return out;
}

/// Sum over the sphere of values * pixel solid angle.
inline double sphere_integral(const Grid<double>& g) {
  const auto omega = row_solid_angles(static_cast<int>(g.rows()), static_cast<int>(g.cols()));
  double total = 0.0;
  for (std::size_t r = 0; r < g.rows(); ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < g.cols(); ++c) row += g(r, c);
    total += row * omega[r];
  }
  return total;
}

namespace detail {

inline void check_raster(int height, int width) {
  if (height <= 0 || width <= 0) throw std::invalid_argument("behavior: raster dimensions must be positive");
}

/// Normalized 1D Gaussian taps for sigma in pixels; a single unit tap when
/// sigma is negligible.
inline std::vector<double> gaussian_taps(double sigma_px) {
  if (!(sigma_px > 1e-3)) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma_px));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int d = -radius; d <= radius; ++d) {
    const double w = std::exp(-0.5 * d * d / (sigma_px * sigma_px));
    taps[static_cast<std::size_t>(d + radius)] = w;
    total += w;
  }
  for (double& w : taps) w /= total;
  return taps;
}

/// Splat counts of every gaze point, optionally skipping one scanpath.
inline Grid<double> splat(const ScanpathSet& sps, int height, int width, std::size_t skip = SIZE_MAX) {
  Grid<double> counts(static_cast<std::size_t>(height), static_cast<std::size_t>(width), 0.0);
  for (std::size_t i = 0; i < sps.size(); ++i) {
    if (i == skip) continue;
    for (const auto& p : sps.scanpaths[i].points) {
      const PixelIndex px = latlon_to_equirect_pixel(unit_to_latlon(p), height, width);
      counts(static_cast<std::size_t>(px.row), static_cast<std::size_t>(px.col)) += 1.0;
    }
  }
  return counts;
}

}  // namespace detail

/// Separable Gaussian blur of sigma_deg degrees. Columns wrap in longitude;
/// rows truncate at the poles with the kernel renormalized so every row's
/// mass is preserved.
inline Grid<double> blur_equirect(const Grid<double>& in, double sigma_deg) {
  const int h = static_cast<int>(in.rows()), w = static_cast<int>(in.cols());
  if (!(sigma_deg >= 0.0)) throw std::invalid_argument("blur_equirect: sigma must be >= 0");
  const std::vector<double> tc = detail::gaussian_taps(sigma_deg / (360.0 / w));
  const std::vector<double> tr = detail::gaussian_taps(sigma_deg / (180.0 / h));
  const int rc = static_cast<int>(tc.size() / 2), rr = static_cast<int>(tr.size() / 2);

  Grid<double> tmp(in.rows(), in.cols(), 0.0);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int d = -rc; d <= rc; ++d)
        acc += tc[static_cast<std::size_t>(d + rc)] * in(static_cast<std::size_t>(r), static_cast<std::size_t>(((c + d) % w + w) % w));
      tmp(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
    }
  if (rr == 0) return tmp;
  // Scatter each source row into its neighbours so mass near the poles is kept.
  Grid<double> out(in.rows(), in.cols(), 0.0);
  for (int r = 0; r < h; ++r) {
    double kept = 0.0;
    for (int d = -rr; d <= rr; ++d)
      if (r + d >= 0 && r + d < h) kept += tr[static_cast<std::size_t>(d + rr)];
    for (int d = -rr; d <= rr; ++d) {
      if (r + d < 0 || r + d >= h) continue;
      const double wgt = tr[static_cast<std::size_t>(d + rr)] / kept;
      for (int c = 0; c < w; ++c)
        out(static_cast<std::size_t>(r + d), static_cast<std::size_t>(c)) += wgt * tmp(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    }
  }
  return out;
}

/// Pseudo-saliency map: every gaze point splatted to its pixel, blurred,
/// normalized to sum one. Each point carries mass 1/N before blurring so the
/// result commutes exactly with whole-pixel longitude rolls.
inline AggregateMap aggregate_map(const ScanpathSet& sps, int height, int width, double blur_sigma_deg) {
  detail::check_raster(height, width);
  Grid<double> counts = detail::splat(sps, height, width);
  double n = 0.0;
  for (const auto& sp : sps.scanpaths) n += static_cast<double>(sp.size());
  if (n == 0.0) throw std::invalid_argument("aggregate_map: no gaze points");
  for (double& v : counts.values()) v /= n;
  return blur_equirect(counts, blur_sigma_deg);
}

/// Row sums of a map: its latitude marginal, north first.
inline std::vector<double> latitude_marginal(const Grid<double>& map) {
  std::vector<double> out(map.rows(), 0.0);
  for (std::size_t r = 0; r < map.rows(); ++r)
    for (std::size_t c = 0; c < map.cols(); ++c) out[r] += map(r, c);
  return out;
}

inline constexpr double kDefaultKappa = 80.0;

/// vMF density on S^2 with unit-norm mean direction, stable for large kappa.
inline double von_mises_fisher_pdf(const UnitVec3& mu, const UnitVec3& x, double kappa) {
  if (!(kappa > 0)) throw std::invalid_argument("von_mises_fisher_pdf: kappa must be > 0");
  return kappa / (kTwoPi * -std::expm1(-2.0 * kappa)) * std::exp(kappa * (mu.dot(x) - 1.0));
}

/// Sample index that lies at `t_seconds` on the scanpath time lattice.
inline std::size_t time_index(const Scanpath& sp, double t_seconds) {
  const double pos = t_seconds * sp.sample_rate_hz;
  if (!(pos > -0.5) || pos >= static_cast<double>(sp.size()) - 0.5)
    throw std::out_of_range("kde_timestamp: t outside scanpath duration");
  return static_cast<std::size_t>(std::llround(pos));
}

/// KDE over the points at one time index, one vMF kernel per scanpath,
/// renormalized so the solid-angle-weighted pixel sum is one.
inline DensityMap kde_index(const ScanpathSet& sps, std::size_t index, double kappa, int height, int width) {
  detail::check_raster(height, width);
  if (sps.empty()) throw std::invalid_argument("kde_timestamp: empty scanpath set");
  if (!(kappa > 0)) throw std::invalid_argument("kde_timestamp: kappa must be > 0");
  std::vector<UnitVec3> centers;
  for (const auto& sp : sps.scanpaths) {
    if (index >= sp.size()) throw std::out_of_range("kde_timestamp: time index outside scanpath");
    centers.push_back(sp[index]);
  }
  DensityMap out{Grid<double>(static_cast<std::size_t>(height), static_cast<std::size_t>(width), 0.0), kappa};
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const UnitVec3 x = latlon_to_unit(equirect_pixel_to_latlon(r, c, height, width));
      double acc = 0.0;
      for (const auto& mu : centers) acc += std::exp(kappa * (mu.dot(x) - 1.0));
      out.density(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
    }
  const double total = sphere_integral(out.density);
  if (!(total > 0)) throw std::domain_error("kde_timestamp: density underflow; kappa too large for the raster");
  for (double& v : out.density.values()) v /= total;
  return out;
}

inline DensityMap kde_timestamp(const ScanpathSet& sps, double t_seconds, double kappa = kDefaultKappa,
                                int height = 90, int width = 180) {
  if (sps.empty()) throw std::invalid_argument("kde_timestamp: empty scanpath set");
  return kde_index(sps, time_index(sps.scanpaths.front(), t_seconds), kappa, height, width);
}

/// Differential entropy in nats, -integral of d log d over the sphere.
inline double density_entropy(const DensityMap& d) {
  const auto omega = row_solid_angles(static_cast<int>(d.density.rows()), static_cast<int>(d.density.cols()));
  double h = 0.0;
  for (std::size_t r = 0; r < d.density.rows(); ++r)
    for (std::size_t c = 0; c < d.density.cols(); ++c) {
      const double v = d.density(r, c);
      if (v > 0) h -= v * std::log(v) * omega[r];
    }
  return h;
}

struct ModeAndSpread {
  GazePoint mode;
  double spread = 0.0;  ///< density-weighted mean angular distance to the mode
  PixelIndex pixel;
};

/// Argmax pixel center (ties to the lowest linear index) and mean distance
/// to it under the density.
inline ModeAndSpread kde_mode_and_spread(const DensityMap& d) {
  const int h = static_cast<int>(d.density.rows()), w = static_cast<int>(d.density.cols());
  if (h == 0 || w == 0) throw std::invalid_argument("kde_mode_and_spread: empty density");
  std::size_t best = 0;
  const auto& vals = d.density.values();
  for (std::size_t k = 1; k < vals.size(); ++k)
    if (vals[k] > vals[best]) best = k;
  ModeAndSpread out;
  out.pixel = {static_cast<int>(best / static_cast<std::size_t>(w)), static_cast<int>(best % static_cast<std::size_t>(w))};
  out.mode = equirect_pixel_to_latlon(out.pixel.row, out.pixel.col, h, w);
  const UnitVec3 m = latlon_to_unit(out.mode);
  const auto omega = row_solid_angles(h, w);
  double mass = 0.0, acc = 0.0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const double wgt = d.density(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) * omega[static_cast<std::size_t>(r)];
      acc += wgt * spherical_distance(m, latlon_to_unit(equirect_pixel_to_latlon(r, c, h, w)));
      mass += wgt;
    }
  out.spread = mass > 0 ? acc / mass : 0.0;
  return out;
}

struct StartRegion {
  double lon_begin_deg = 0.0;  ///< inclusive
  double lon_end_deg = 0.0;    ///< exclusive
  ScanpathSet scanpaths;
};

/// Groups scanpaths by the longitude of their first point. Bins start at
/// -180 degrees; the last bin is clipped at 180.
inline std::vector<StartRegion> start_region_partition(const ScanpathSet& sps, double bin_deg = 40.0) {
  if (!(bin_deg > 0)) throw std::invalid_argument("start_region_partition: bin width must be positive");
  const std::size_t bins = static_cast<std::size_t>(std::ceil(360.0 / bin_deg - 1e-9));
  std::vector<StartRegion> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lon_begin_deg = -180.0 + bin_deg * static_cast<double>(b);
    out[b].lon_end_deg = std::min(180.0, -180.0 + bin_deg * static_cast<double>(b + 1));
    out[b].scanpaths.image_id = sps.image_id;
  }
  for (std::size_t i = 0; i < sps.size(); ++i) {
    const auto& sp = sps.scanpaths[i];
    if (sp.empty()) continue;
    const double lon = rad_to_deg(unit_to_latlon(sp[0]).lon);
    const std::size_t b = std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, std::floor((lon + 180.0) / bin_deg))));
    out[b].scanpaths.scanpaths.push_back(sp);
    if (i < sps.user_ids.size()) out[b].scanpaths.user_ids.push_back(sps.user_ids[i]);
  }
  return out;
}

inline std::vector<double> default_exploration_offsets() {
  std::vector<double> out;
  for (int k = 0; k <= 180; k += 20) out.push_back(k);
  return out;
}

/// Seconds until |wrapped lon(t) - lon(0)| first reaches each offset, with
/// linear interpolation between samples; NaN when never reached.
inline std::vector<double> first_passage_times(const Scanpath& sp, const std::vector<double>& offsets_deg) {
  std::vector<double> out(offsets_deg.size(), std::numeric_limits<double>::quiet_NaN());
  if (sp.empty()) return out;
  const double lon0 = unit_to_latlon(sp[0]).lon;
  std::vector<double> dev(sp.size());
  for (std::size_t t = 0; t < sp.size(); ++t) dev[t] = rad_to_deg(std::abs(wrap_longitude(unit_to_latlon(sp[t]).lon - lon0)));
  for (std::size_t k = 0; k < offsets_deg.size(); ++k) {
    const double target = offsets_deg[k];
    if (target <= 0.0) {
      out[k] = 0.0;
      continue;
    }
    for (std::size_t t = 1; t < sp.size(); ++t) {
      if (dev[t] < target) continue;
      // dev[t - 1] < target <= dev[t]: the earlier samples never got there.
      const double frac = (target - dev[t - 1]) / (dev[t] - dev[t - 1]);
      out[k] = (static_cast<double>(t - 1) + frac) / sp.sample_rate_hz;
      break;
    }
  }
  return out;
}

struct ExplorationCurve {
  std::vector<double> offsets_deg;
  std::vector<double> mean_time;  ///< seconds; NaN where nobody reached the offset
  std::vector<double> coverage;   ///< fraction of scanpaths reaching each offset
  std::vector<std::vector<double>> per_scanpath;
};

inline ExplorationCurve exploration_time(const ScanpathSet& sps,
                                         const std::vector<double>& offsets_deg = default_exploration_offsets()) {
  for (std::size_t k = 0; k < offsets_deg.size(); ++k)
    if (!(offsets_deg[k] >= 0) || (k > 0 && offsets_deg[k] < offsets_deg[k - 1]))
      throw std::invalid_argument("exploration_time: offsets must be nonnegative and nondecreasing");
  ExplorationCurve out;
  out.offsets_deg = offsets_deg;
  out.mean_time.assign(offsets_deg.size(), 0.0);
  out.coverage.assign(offsets_deg.size(), 0.0);
  std::vector<std::size_t> reached(offsets_deg.size(), 0);
  for (const auto& sp : sps.scanpaths) {
    out.per_scanpath.push_back(first_passage_times(sp, offsets_deg));
    for (std::size_t k = 0; k < offsets_deg.size(); ++k)
      if (!std::isnan(out.per_scanpath.back()[k])) {
        out.mean_time[k] += out.per_scanpath.back()[k];
        ++reached[k];
      }
  }
  for (std::size_t k = 0; k < offsets_deg.size(); ++k) {
    out.mean_time[k] = reached[k] ? out.mean_time[k] / static_cast<double>(reached[k]) : std::numeric_limits<double>::quiet_NaN();
    out.coverage[k] = sps.empty() ? 0.0 : static_cast<double>(reached[k]) / static_cast<double>(sps.size());
  }
  return out;
}

struct RocCurve {
  std::vector<double> salient_percent;  ///< 0, ladder..., 100
  std::vector<double> hit_rate;         ///< mean over scanpaths, percent
  std::vector<std::vector<double>> per_scanpath;
};

struct RocConfig {
  int height = 64;
  int width = 128;
  double blur_sigma_deg = 5.0;
  std::vector<double> ladder;  ///< percent; empty = 1..100 in unit steps
  unsigned threads = 1;
};

namespace detail {

/// Rank of every pixel by decreasing density (ties: lowest index first) and
/// the cumulative solid angle after each rank.
inline std::pair<std::vector<std::size_t>, std::vector<double>> rank_pixels(const Grid<double>& map) {
  const std::size_t n = map.size(), w = map.cols();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& v = map.values();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b] || (v[a] == v[b] && a < b); });
  const auto omega = row_solid_angles(static_cast<int>(map.rows()), static_cast<int>(w));
  std::vector<std::size_t> rank(n);
  std::vector<double> cum(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    rank[order[k]] = k;
    acc += omega[order[k] / w];
    cum[k] = acc;
  }
  return {rank, cum};
}

}  // namespace detail

/// Inter-observer congruency: for each scanpath i, the fraction of its points
/// inside the top-n% (by solid angle) of the map built from all others.
inline RocCurve roc_congruency(const ScanpathSet& sps, const RocConfig& cfg = {}) {
  detail::check_raster(cfg.height, cfg.width);
  if (sps.size() < 2) throw std::invalid_argument("roc_congruency: need at least two scanpaths");
  std::vector<double> ladder = cfg.ladder;
  if (ladder.empty())
    for (int k = 1; k <= 100; ++k) ladder.push_back(k);
  for (std::size_t k = 0; k < ladder.size(); ++k)
    if (!(ladder[k] > 0 && ladder[k] <= 100) || (k > 0 && ladder[k] <= ladder[k - 1]))
      throw std::invalid_argument("roc_congruency: ladder must be increasing within (0, 100]");
  if (ladder.back() != 100.0) ladder.push_back(100.0);

  RocCurve out;
  out.salient_percent.push_back(0.0);
  out.salient_percent.insert(out.salient_percent.end(), ladder.begin(), ladder.end());
  out.per_scanpath.assign(sps.size(), {});

  const Grid<double> all = detail::splat(sps, cfg.height, cfg.width);
  auto one = [&](std::size_t i) {
    Grid<double> counts = all;
    for (const auto& p : sps.scanpaths[i].points) {
      const PixelIndex px = latlon_to_equirect_pixel(unit_to_latlon(p), cfg.height, cfg.width);
      counts(static_cast<std::size_t>(px.row), static_cast<std::size_t>(px.col)) -= 1.0;
    }
    const auto [rank, cum] = detail::rank_pixels(blur_equirect(counts, cfg.blur_sigma_deg));
    const double total = cum.back();
    std::vector<double> curve{0.0};
    const auto& pts = sps.scanpaths[i].points;
    for (double n : ladder) {
      // Smallest prefix whose solid angle reaches n% of the sphere.
      const double need = n >= 100.0 ? total : n / 100.0 * total;
      const std::size_t len = static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), need) - cum.begin()) + 1;
      std::size_t hits = 0;
      for (const auto& p : pts) {
        const PixelIndex px = latlon_to_equirect_pixel(unit_to_latlon(p), cfg.height, cfg.width);
        if (rank[static_cast<std::size_t>(px.row) * static_cast<std::size_t>(cfg.width) + static_cast<std::size_t>(px.col)] < len) ++hits;
      }
      curve.push_back(pts.empty() ? 100.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(pts.size()));
    }
    out.per_scanpath[i] = std::move(curve);
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(sps.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < sps.size(); ++i) one(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < sps.size(); i += threads) one(i);
      });
    for (auto& th : pool) th.join();
  }
  out.hit_rate.assign(out.salient_percent.size(), 0.0);
  for (const auto& curve : out.per_scanpath)
    for (std::size_t k = 0; k < curve.size(); ++k) out.hit_rate[k] += curve[k];
  for (double& h : out.hit_rate) h /= static_cast<double>(sps.size());
  return out;
}

/// Area under a ROC curve in percent-squared units normalized to [0, 1].
inline double roc_area(const RocCurve& c) {
  double a = 0.0;
  for (std::size_t k = 1; k < c.salient_percent.size(); ++k)
    a += (c.salient_percent[k] - c.salient_percent[k - 1]) * 0.5 * (c.hit_rate[k] + c.hit_rate[k - 1]);
  return a / 1e4;
}

}  // namespace scankit
