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

// Dynamic time warping between scanpaths under the great-circle ground
// distance: the hard minimum over monotone alignments, its soft-min smoothing,
// and the analytic gradient of the smoothed value.
//
// Alignments are monotone lattice paths from (0, 0) to (n-1, m-1) using the
// steps (+1, 0), (0, +1) and (+1, +1).

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scankit/grid.hpp"
#include "scankit/sphere.hpp"

namespace scankit {

using CostMatrix = Grid<double>;

struct AlignmentPath {
  std::vector<std::pair<std::size_t, std::size_t>> cells;

  /// Binary n x m indicator of the path.
  Grid<unsigned char> to_matrix(std::size_t n, std::size_t m) const {
    Grid<unsigned char> a(n, m, 0);
    for (auto [i, j] : cells) a(i, j) = 1;
    return a;
  }
};

struct DtwResult {
  double value = 0.0;
  AlignmentPath path;
};

/// gamma == 0 selects hard DTW; gamma > 0 the soft-min relaxation.
struct SoftDtwConfig {
  double gamma = 1.0;
};

inline CostMatrix cost_matrix_spherical(const Scanpath& r, const Scanpath& s) {
  if (r.empty() || s.empty()) throw std::invalid_argument("cost_matrix_spherical: empty scanpath");
  CostMatrix cost(r.size(), s.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) cost(i, j) = spherical_distance(r[i], s[j]);
  return cost;
}

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// -gamma * log(exp(-a/gamma) + exp(-b/gamma) + exp(-c/gamma)), shifted by the
// minimum so small gamma cannot overflow.
inline double softmin3(double a, double b, double c, double gamma) {
  const double lo = std::min({a, b, c});
  if (lo == kInf) return kInf;
  const double sum = std::exp((lo - a) / gamma) + std::exp((lo - b) / gamma) +
                     std::exp((lo - c) / gamma);
  return lo - gamma * std::log(sum);
}

// Accumulated-cost table with a one-cell padding border: R(0,0) = 0, the rest
// of the border is +inf, R(i+1, j+1) covers cost(i, j).
inline Grid<double> accumulate(const CostMatrix& cost, double gamma) {
  const std::size_t n = cost.rows(), m = cost.cols();
  Grid<double> acc(n + 1, m + 1, kInf);
  acc(0, 0) = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const double diag = acc(i - 1, j - 1), up = acc(i - 1, j), left = acc(i, j - 1);
      const double best = gamma == 0.0 ? std::min({diag, up, left}) : softmin3(diag, up, left, gamma);
      acc(i, j) = cost(i - 1, j - 1) + best;
    }
  }
  return acc;
}

}  // namespace detail

/// Minimum-cost monotone alignment. Backtracking ties prefer the diagonal,
/// then the vertical (i-1, j), then the horizontal (i, j-1) predecessor.
inline DtwResult dtw_hard(const CostMatrix& cost) {
  if (cost.empty()) throw std::invalid_argument("dtw_hard: empty cost matrix");
  const Grid<double> acc = detail::accumulate(cost, 0.0);
  std::size_t i = cost.rows(), j = cost.cols();
  DtwResult out;
  out.value = acc(i, j);
  while (true) {
    out.path.cells.emplace_back(i - 1, j - 1);
    if (i == 1 && j == 1) break;
    const double diag = acc(i - 1, j - 1), up = acc(i - 1, j), left = acc(i, j - 1);
    // Border cells have a single predecessor; this also keeps NaN costs in bounds.
    if (i == 1) {
      --j;
    } else if (j == 1) {
      --i;
    } else if (diag <= up && diag <= left) {
      --i;
      --j;
    } else if (up <= left) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(out.path.cells.begin(), out.path.cells.end());
  return out;
}

inline double soft_dtw(const CostMatrix& cost, SoftDtwConfig cfg = {}) {
  if (cost.empty()) throw std::invalid_argument("soft_dtw: empty cost matrix");
  if (!(cfg.gamma >= 0.0)) throw std::invalid_argument("soft_dtw: gamma must be >= 0");
  return detail::accumulate(cost, cfg.gamma)(cost.rows(), cost.cols());
}

inline double soft_dtw_spherical(const Scanpath& r, const Scanpath& s, SoftDtwConfig cfg = {}) {
  return soft_dtw(cost_matrix_spherical(r, s), cfg);
}

/// Expected alignment under the Gibbs distribution over monotone paths
/// (the derivative of soft_dtw with respect to each cost entry).
inline Grid<double> soft_dtw_alignment(const CostMatrix& cost, SoftDtwConfig cfg = {}) {
  if (cost.empty()) throw std::invalid_argument("soft_dtw_alignment: empty cost matrix");
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("soft_dtw_alignment: gamma must be > 0");
  const double gamma = cfg.gamma;
  const std::size_t n = cost.rows(), m = cost.cols();
  Grid<double> acc = detail::accumulate(cost, gamma);

  // Padded to (n + 2) x (m + 2): the far border is -inf so it never
  // contributes, except the corner that seeds the recursion.
  Grid<double> r(n + 2, m + 2, -detail::kInf);
  Grid<double> d(n + 2, m + 2, 0.0);
  Grid<double> e(n + 2, m + 2, 0.0);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      r(i, j) = acc(i, j);
      d(i, j) = cost(i - 1, j - 1);
    }
  r(n + 1, m + 1) = acc(n, m);
  e(n + 1, m + 1) = 1.0;

  for (std::size_t i = n; i >= 1; --i) {
    for (std::size_t j = m; j >= 1; --j) {
      const double here = r(i, j);
      const double a = std::exp((r(i + 1, j) - here - d(i + 1, j)) / gamma);
      const double b = std::exp((r(i, j + 1) - here - d(i, j + 1)) / gamma);
      const double c = std::exp((r(i + 1, j + 1) - here - d(i + 1, j + 1)) / gamma);
      e(i, j) = e(i + 1, j) * a + e(i, j + 1) * b + e(i + 1, j + 1) * c;
    }
  }

  Grid<double> out(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out(i, j) = e(i + 1, j + 1);
  return out;
}

/// Smoothing of the chord length inside the gradient. Coincident points have
/// a kink in the arc length; sqrt(chord^2 + eps^2) keeps its slope bounded.
inline constexpr double kChordSmoothing = 1e-8;

/// d spherical_distance(a, b) / d a for raw (not necessarily unit) vectors.
inline Vec3 spherical_distance_grad(const Vec3& a, const Vec3& b) {
  const Vec3 diff = a - b;
  const double chord = std::sqrt(diff.dot(diff) + kChordSmoothing * kChordSmoothing);
  const double half = 0.5 * chord;
  const double slope = std::sqrt(std::max(1.0 - half * half, 1e-24));
  return diff * (1.0 / (chord * slope));
}

struct SoftDtwGradient {
  double value = 0.0;
  std::vector<Vec3> d_first;   ///< d value / d r_i
  std::vector<Vec3> d_second;  ///< d value / d s_j
  Grid<double> alignment;      ///< expected alignment weights
};

/// Value and gradients of soft_dtw_spherical with respect to the raw 3D
/// coordinates of both scanpaths. No re-normalization Jacobian is applied.
inline SoftDtwGradient soft_dtw_spherical_value_and_grad(const Scanpath& r, const Scanpath& s,
                                                         SoftDtwConfig cfg = {}) {
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("soft_dtw_grad: gamma must be > 0");
  const CostMatrix cost = cost_matrix_spherical(r, s);
  SoftDtwGradient g;
  g.value = soft_dtw(cost, cfg);
  g.alignment = soft_dtw_alignment(cost, cfg);
  g.d_first.assign(r.size(), Vec3{});
  g.d_second.assign(s.size(), Vec3{});
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double w = g.alignment(i, j);
      if (w == 0.0) continue;
      const Vec3 dd = spherical_distance_grad(r[i], s[j]) * w;
      g.d_first[i] += dd;
      g.d_second[j] += dd * -1.0;
    }
  }
  return g;
}

inline std::vector<Vec3> soft_dtw_grad(const Scanpath& r, const Scanpath& s, SoftDtwConfig cfg = {}) {
  return soft_dtw_spherical_value_and_grad(r, s, cfg).d_first;
}

}  // namespace scankit
