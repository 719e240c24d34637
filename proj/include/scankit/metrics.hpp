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

// Scanpath similarity metrics and the comparison protocols built on them.
//
// All spatial metrics use the great-circle distance and report radians.
// Metrics accept scanpaths of different lengths unless noted.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "scankit/grid.hpp"
#include "scankit/random.hpp"
#include "scankit/sphere.hpp"
#include "scankit/timewarp.hpp"

namespace scankit {

struct ScanpathSet {
  std::string image_id;
  std::vector<Scanpath> scanpaths;
  std::vector<std::string> user_ids;  ///< optional; parallel to scanpaths when present

  std::size_t size() const { return scanpaths.size(); }
  bool empty() const { return scanpaths.empty(); }
};

/// Lat/lon bins that tile the equirectangular rectangle; bin index is
/// row * n_lon + col with row 0 at the north pole and col 0 at lon = -pi.
struct QuantizationGrid {
  int n_lat = 9;
  int n_lon = 18;

  int bins() const { return n_lat * n_lon; }
  void validate() const {
    if (n_lat <= 0 || n_lon <= 0) throw std::invalid_argument("QuantizationGrid: bin counts must be positive");
  }
  int bin_of(const UnitVec3& p) const {
    const PixelIndex px = latlon_to_equirect_pixel(unit_to_latlon(p), n_lat, n_lon);
    return px.row * n_lon + px.col;
  }
  UnitVec3 bin_center(int bin) const {
    return latlon_to_unit(equirect_pixel_to_latlon(bin / n_lon, bin % n_lon, n_lat, n_lon));
  }
};

struct RecurrenceConfig {
  double radius = 0.25;  ///< radians
  int min_line = 2;

  void validate() const {
    if (!(radius > 0.0 && radius < kPi)) throw std::invalid_argument("RecurrenceConfig: radius must be in (0, pi)");
    if (min_line < 2) throw std::invalid_argument("RecurrenceConfig: min_line must be >= 2");
  }
};

inline std::vector<int> quantize(const Scanpath& sp, const QuantizationGrid& grid) {
  grid.validate();
  std::vector<int> symbols;
  symbols.reserve(sp.size());
  for (const auto& p : sp.points) symbols.push_back(grid.bin_of(p));
  return symbols;
}

/// Unit-cost edit distance between two symbol strings.
inline std::size_t edit_distance(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::size_t levenshtein(const Scanpath& a, const Scanpath& b, const QuantizationGrid& grid = {}) {
  return edit_distance(quantize(a, grid), quantize(b, grid));
}

struct ScanMatchConfig {
  double max_score = 1.0;
  double gap_penalty = 0.0;
};

/// Default substitution score: max_score scaled down linearly with the
/// great-circle distance between bin centers (0 for antipodal bins).
inline std::function<double(int, int)> spherical_substitution_score(const QuantizationGrid& grid,
                                                                    double max_score = 1.0) {
  return [grid, max_score](int a, int b) {
    if (a == b) return max_score;
    return max_score - spherical_distance(grid.bin_center(a), grid.bin_center(b)) / kPi * max_score;
  };
}

/// Needleman-Wunsch global alignment score of two symbol strings,
/// unnormalized. Gaps add `gap_penalty` (usually <= 0).
inline double needleman_wunsch(const std::vector<int>& a, const std::vector<int>& b, double gap_penalty,
                               const std::function<double(int, int)>& score) {
  Grid<double> f(a.size() + 1, b.size() + 1, 0.0);
  for (std::size_t i = 1; i <= a.size(); ++i) f(i, 0) = f(i - 1, 0) + gap_penalty;
  for (std::size_t j = 1; j <= b.size(); ++j) f(0, j) = f(0, j - 1) + gap_penalty;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      f(i, j) = std::max({f(i - 1, j - 1) + score(a[i - 1], b[j - 1]), f(i - 1, j) + gap_penalty,
                          f(i, j - 1) + gap_penalty});
  return f(a.size(), b.size());
}

/// ScanMatch similarity in [0, 1]: alignment score over max_score * max(len).
inline double scanmatch(const Scanpath& a, const Scanpath& b, const QuantizationGrid& grid = {},
                        ScanMatchConfig cfg = {}, std::function<double(int, int)> score_fn = {}) {
  if (!score_fn) score_fn = spherical_substitution_score(grid, cfg.max_score);
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  const double raw = needleman_wunsch(quantize(a, grid), quantize(b, grid), cfg.gap_penalty, score_fn);
  return raw / (cfg.max_score * static_cast<double>(longest));
}

inline double hausdorff(const Scanpath& a, const Scanpath& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff: empty scanpath");
  const CostMatrix d = cost_matrix_spherical(a, b);
  double ab = 0.0, ba = 0.0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d.cols(); ++j) best = std::min(best, d(i, j));
    ab = std::max(ab, best);
  }
  for (std::size_t j = 0; j < d.cols(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d.rows(); ++i) best = std::min(best, d(i, j));
    ba = std::max(ba, best);
  }
  return std::max(ab, ba);
}

/// Discrete Frechet distance.
inline double frechet(const Scanpath& a, const Scanpath& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("frechet: empty scanpath");
  const CostMatrix d = cost_matrix_spherical(a, b);
  Grid<double> f(d.rows(), d.cols());
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < d.cols(); ++j) {
      double prev;
      if (i == 0 && j == 0) prev = 0.0;
      else if (i == 0) prev = f(0, j - 1);
      else if (j == 0) prev = f(i - 1, 0);
      else prev = std::min({f(i - 1, j - 1), f(i - 1, j), f(i, j - 1)});
      f(i, j) = std::max(prev, d(i, j));
    }
  return f(d.rows() - 1, d.cols() - 1);
}

inline double dtw_metric(const Scanpath& a, const Scanpath& b) {
  return dtw_hard(cost_matrix_spherical(a, b)).value;
}

namespace detail {
inline Scanpath window(const Scanpath& s, std::size_t start, std::size_t k) {
  Scanpath w;
  w.sample_rate_hz = s.sample_rate_hz;
  w.points.assign(s.points.begin() + static_cast<std::ptrdiff_t>(start),
                  s.points.begin() + static_cast<std::ptrdiff_t>(start + k));
  return w;
}
}  // namespace detail

/// Time-delay embedding distance: the mean, over length-k windows of `a`
/// taken every `stride` samples, of the smallest Hausdorff distance to any
/// length-k window of `b`. Not symmetric.
inline double tde(const Scanpath& a, const Scanpath& b, std::size_t k, std::size_t stride = 1) {
  if (k == 0 || stride == 0) throw std::invalid_argument("tde: window and stride must be positive");
  if (k > a.size() || k > b.size()) throw std::invalid_argument("tde: window longer than a scanpath");
  double total = 0.0;
  std::size_t windows = 0;
  for (std::size_t i = 0; i + k <= a.size(); i += stride) {
    const Scanpath wa = detail::window(a, i, k);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + k <= b.size(); ++j) best = std::min(best, hausdorff(wa, detail::window(b, j, k)));
    total += best;
    ++windows;
  }
  return total / static_cast<double>(windows);
}

/// Stretches `s` to `n` samples by nearest-index selection.
inline Scanpath resample_nearest(const Scanpath& s, std::size_t n) {
  if (s.empty() || n == 0) throw std::invalid_argument("resample_nearest: empty input or target");
  Scanpath out;
  out.sample_rate_hz = s.sample_rate_hz * static_cast<double>(n) / static_cast<double>(s.size());
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pos = n == 1 ? 0.0 : static_cast<double>(i) * (s.size() - 1) / static_cast<double>(n - 1);
    out.points.push_back(s[static_cast<std::size_t>(std::llround(pos))]);
  }
  return out;
}

struct RecurrenceMetrics {
  double rec = 0.0;
  double det = 0.0;
  double lam = 0.0;
  double corm = 0.0;
};

/// Binary cross-recurrence matrix r_ij = [dist(a_i, b_j) <= radius]. The
/// shorter scanpath is first stretched to the longer length.
inline Grid<unsigned char> recurrence_matrix(const Scanpath& a, const Scanpath& b, double radius) {
  const std::size_t n = std::max(a.size(), b.size());
  const Scanpath ra = a.size() == n ? a : resample_nearest(a, n);
  const Scanpath rb = b.size() == n ? b : resample_nearest(b, n);
  Grid<unsigned char> r(n, n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r(i, j) = spherical_distance(ra[i], rb[j]) <= radius ? 1 : 0;
  return r;
}

/// REC, DET, LAM and CORM (all percentages) of a binary N x N recurrence
/// matrix. LAM counts each cell once even if it lies on both a horizontal and
/// a vertical line.
inline RecurrenceMetrics recurrence_statistics(const Grid<unsigned char>& r, int min_line) {
  const std::size_t n = r.rows();
  RecurrenceMetrics out;
  double count = 0.0, lag = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (r(i, j)) {
        count += 1.0;
        lag += static_cast<double>(j) - static_cast<double>(i);
      }
  if (count == 0.0 || n == 0) return out;
  const auto min_len = static_cast<std::size_t>(min_line);

  double diagonal_cells = 0.0;
  // Diagonal offsets d = j - i from -(n-1) to n-1.
  for (std::ptrdiff_t d = -static_cast<std::ptrdiff_t>(n) + 1; d < static_cast<std::ptrdiff_t>(n); ++d) {
    std::size_t run = 0;
    const std::size_t i0 = d < 0 ? static_cast<std::size_t>(-d) : 0;
    const std::size_t j0 = d < 0 ? 0 : static_cast<std::size_t>(d);
    for (std::size_t k = 0; i0 + k < n && j0 + k < n; ++k) {
      if (r(i0 + k, j0 + k)) {
        ++run;
      } else {
        if (run >= min_len) diagonal_cells += static_cast<double>(run);
        run = 0;
      }
    }
    if (run >= min_len) diagonal_cells += static_cast<double>(run);
  }

  Grid<unsigned char> laminar(n, n, 0);
  auto mark_runs = [&](bool horizontal) {
    for (std::size_t line = 0; line < n; ++line) {
      std::size_t start = 0, run = 0;
      for (std::size_t k = 0; k <= n; ++k) {
        const bool on = k < n && (horizontal ? r(line, k) : r(k, line));
        if (on) {
          if (run == 0) start = k;
          ++run;
          continue;
        }
        if (run >= min_len)
          for (std::size_t t = start; t < start + run; ++t) (horizontal ? laminar(line, t) : laminar(t, line)) = 1;
        run = 0;
      }
    }
  };
  mark_runs(true);
  mark_runs(false);
  double laminar_cells = 0.0;
  for (unsigned char v : laminar.values()) laminar_cells += v;

  out.rec = 100.0 * count / (static_cast<double>(n) * static_cast<double>(n));
  out.det = 100.0 * diagonal_cells / count;
  out.lam = 100.0 * laminar_cells / count;
  out.corm = n > 1 ? 100.0 * lag / (static_cast<double>(n - 1) * count) : 0.0;
  return out;
}

inline RecurrenceMetrics cross_recurrence(const Scanpath& a, const Scanpath& b, const RecurrenceConfig& cfg = {}) {
  cfg.validate();
  if (a.empty() || b.empty()) throw std::invalid_argument("cross_recurrence: empty scanpath");
  return recurrence_statistics(recurrence_matrix(a, b, cfg.radius), cfg.min_line);
}

// ---------------------------------------------------------------------------
// Protocols

using PairMetric = std::function<double(const Scanpath&, const Scanpath&)>;

/// Mean of `metric` over the full gen x gt cross product, summed in index
/// order.
inline double pairwise_eval(const ScanpathSet& gen, const ScanpathSet& gt, const PairMetric& metric) {
  if (gen.empty() || gt.empty()) throw std::invalid_argument("pairwise_eval: empty scanpath set");
  double total = 0.0;
  for (const auto& g : gen.scanpaths)
    for (const auto& t : gt.scanpaths) total += metric(g, t);
  return total / static_cast<double>(gen.size() * gt.size());
}

/// Mean of `metric` over all ordered pairs (i, j), i != j, of ground truth.
inline double human_baseline(const ScanpathSet& gt, const PairMetric& metric) {
  if (gt.size() < 2) throw std::invalid_argument("human_baseline: need at least two scanpaths");
  double total = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i)
    for (std::size_t j = 0; j < gt.size(); ++j)
      if (i != j) total += metric(gt.scanpaths[i], gt.scanpaths[j]);
  return total / static_cast<double>(gt.size() * (gt.size() - 1));
}

/// `n` scanpaths of `count` points drawn uniformly over the equirectangular
/// rectangle (uniform in lat and lon, not uniform on the sphere).
inline ScanpathSet random_baseline(std::size_t count, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("random_baseline: need at least one scanpath");
  if (count == 0) throw std::invalid_argument("random_baseline: need at least one point per scanpath");
  std::mt19937_64 rng(seed);
  ScanpathSet set;
  set.image_id = "random";
  set.scanpaths.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Scanpath s;
    s.points.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
      const double lat = (uniform01(rng) - 0.5) * kPi;
      const double lon = uniform01(rng) * kTwoPi - kPi;
      s.points.push_back(latlon_to_unit({lat, lon}));
    }
    set.scanpaths.push_back(std::move(s));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Reports

struct MetricConfig {
  QuantizationGrid grid;
  ScanMatchConfig scanmatch;
  RecurrenceConfig recurrence;
  std::size_t tde_window = 5;
  std::size_t tde_stride = 1;
};

/// Column order used by every serialized report.
inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"LEV", "SMT", "HAU", "FRE", "DTW",
                                              "TDE", "REC", "DET", "LAM", "CORM"};
  return names;
}

struct MetricValues {
  double lev = 0, smt = 0, hau = 0, fre = 0, dtw = 0, tde = 0, rec = 0, det = 0, lam = 0, corm = 0;

  double get(const std::string& name) const {
    if (name == "LEV") return lev;
    if (name == "SMT") return smt;
    if (name == "HAU") return hau;
    if (name == "FRE") return fre;
    if (name == "DTW") return dtw;
    if (name == "TDE") return tde;
    if (name == "REC") return rec;
    if (name == "DET") return det;
    if (name == "LAM") return lam;
    if (name == "CORM") return corm;
    throw std::invalid_argument("unknown metric: " + name);
  }
  MetricValues& operator+=(const MetricValues& o) {
    lev += o.lev, smt += o.smt, hau += o.hau, fre += o.fre, dtw += o.dtw;
    tde += o.tde, rec += o.rec, det += o.det, lam += o.lam, corm += o.corm;
    return *this;
  }
  MetricValues& operator/=(double d) {
    lev /= d, smt /= d, hau /= d, fre /= d, dtw /= d;
    tde /= d, rec /= d, det /= d, lam /= d, corm /= d;
    return *this;
  }
};

/// Every metric on one pair.
inline MetricValues evaluate_pair(const Scanpath& a, const Scanpath& b, const MetricConfig& cfg) {
  MetricValues v;
  v.lev = static_cast<double>(levenshtein(a, b, cfg.grid));
  v.smt = scanmatch(a, b, cfg.grid, cfg.scanmatch);
  v.hau = hausdorff(a, b);
  v.fre = frechet(a, b);
  v.dtw = dtw_metric(a, b);
  const std::size_t k = std::min({cfg.tde_window, a.size(), b.size()});
  v.tde = tde(a, b, k, cfg.tde_stride);
  const RecurrenceMetrics r = cross_recurrence(a, b, cfg.recurrence);
  v.rec = r.rec, v.det = r.det, v.lam = r.lam, v.corm = r.corm;
  return v;
}

/// Which comparison protocol produced a report.
enum class Protocol { kPairwise, kHuman, kRandom };

inline const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kPairwise: return "pairwise";
    case Protocol::kHuman: return "human_baseline";
    case Protocol::kRandom: return "random_baseline";
  }
  return "unknown";
}

struct MetricReport {
  std::string image_id;
  Protocol protocol = Protocol::kPairwise;
  std::size_t pairs = 0;
  MetricValues mean;
  MetricConfig config;
  std::uint64_t seed = 0;  ///< only meaningful for the random protocol
};

inline MetricReport report_pairwise(const ScanpathSet& gen, const ScanpathSet& gt, const MetricConfig& cfg,
                                    Protocol protocol = Protocol::kPairwise) {
  if (gen.empty() || gt.empty()) throw std::invalid_argument("report_pairwise: empty scanpath set");
  MetricReport rep;
  rep.image_id = gt.image_id;
  rep.protocol = protocol;
  rep.config = cfg;
  for (const auto& g : gen.scanpaths)
    for (const auto& t : gt.scanpaths) {
      rep.mean += evaluate_pair(g, t, cfg);
      ++rep.pairs;
    }
  rep.mean /= static_cast<double>(rep.pairs);
  return rep;
}

inline MetricReport report_human_baseline(const ScanpathSet& gt, const MetricConfig& cfg) {
  if (gt.size() < 2) throw std::invalid_argument("human_baseline: need at least two scanpaths");
  MetricReport rep;
  rep.image_id = gt.image_id;
  rep.protocol = Protocol::kHuman;
  rep.config = cfg;
  for (std::size_t i = 0; i < gt.size(); ++i)
    for (std::size_t j = 0; j < gt.size(); ++j)
      if (i != j) {
        rep.mean += evaluate_pair(gt.scanpaths[i], gt.scanpaths[j], cfg);
        ++rep.pairs;
      }
  rep.mean /= static_cast<double>(rep.pairs);
  return rep;
}

inline MetricReport report_random_baseline(const ScanpathSet& gt, std::size_t n, std::uint64_t seed,
                                           const MetricConfig& cfg) {
  if (gt.empty()) throw std::invalid_argument("random_baseline: empty ground truth");
  std::size_t longest = 0;
  for (const auto& s : gt.scanpaths) longest = std::max(longest, s.size());
  ScanpathSet rnd = random_baseline(longest, n, seed);
  MetricReport rep = report_pairwise(rnd, gt, cfg, Protocol::kRandom);
  rep.seed = seed;
  return rep;
}

}  // namespace scankit
