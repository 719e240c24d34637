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

// Ken Burns style thumbnails: a viewport trajectory over a static panorama
// driven by the per-timestamp KDE of many generated scanpaths.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "scankit/behavior.hpp"
#include "scankit/gan.hpp"
#include "scankit/image.hpp"
#include "scankit/sphere.hpp"

namespace scankit {

struct TrajectoryFrame {
  double t = 0.0;  ///< seconds
  GazePoint center;
  double fov_deg = 0.0;  ///< horizontal
};

struct ThumbnailConfig {
  std::size_t n = 100;
  double kappa = kDefaultKappa;
  std::uint64_t seed = 0;
  double fov_a = 4.0;   ///< degrees of fov per degree of spread
  double fov_b = 30.0;  ///< degrees
  double fov_min = 30.0;
  double fov_max = 100.0;
  double max_pan_deg_per_s = 30.0;
  int fov_window = 3;
  int kde_height = 90;
  int kde_width = 180;
  unsigned threads = 1;

  void validate() const {
    if (!(fov_min > 0 && fov_min <= fov_max && fov_max < 180))
      throw std::invalid_argument("ThumbnailConfig: need 0 < fov_min <= fov_max < 180");
    if (!(max_pan_deg_per_s > 0)) throw std::invalid_argument("ThumbnailConfig: max pan rate must be positive");
    if (fov_window < 1) throw std::invalid_argument("ThumbnailConfig: fov window must be >= 1");
    if (!(kappa > 0)) throw std::invalid_argument("ThumbnailConfig: kappa must be positive");
  }
};

/// Point a fraction `f` of the way from a to b along the great circle.
inline UnitVec3 slerp(const UnitVec3& a, const UnitVec3& b, double f) {
  const double omega = spherical_distance(a, b);
  if (omega < 1e-12) return a;
  if (kPi - omega < 1e-9) {
    // Antipodal: any great circle works; go through the tangent east of a.
    const Vec3 axis = tangent_basis(unit_to_latlon(a)).east;
    return (a * std::cos(f * kPi) + axis * std::sin(f * kPi)).normalized();
  }
  const double s = std::sin(omega);
  return (a * (std::sin((1 - f) * omega) / s) + b * (std::sin(f * omega) / s)).normalized();
}

/// Trajectory from an existing scanpath set (all scanpaths must share
/// length and sample rate). fov = clamp(a * excess spread + b), where the
/// excess is the KDE spread beyond that of a single kernel.
inline std::vector<TrajectoryFrame> trajectory_from_scanpaths(const ScanpathSet& sps, const ThumbnailConfig& cfg) {
  cfg.validate();
  if (sps.empty() || sps.scanpaths.front().empty()) throw std::invalid_argument("thumbnail_trajectory: no scanpaths");
  const std::size_t length = sps.scanpaths.front().size();
  const double hz = sps.scanpaths.front().sample_rate_hz;
  for (const auto& sp : sps.scanpaths)
    if (sp.size() != length) throw std::invalid_argument("thumbnail_trajectory: scanpaths differ in length");

  std::vector<TrajectoryFrame> frames(length);
  std::vector<UnitVec3> modes(length);
  // Spread of one kernel centred on a pixel of each row; only the excess
  // over it counts as disagreement between observers.
  std::vector<double> kernel_spread(static_cast<std::size_t>(cfg.kde_height), -1.0);
  for (std::size_t k = 0; k < length; ++k) {
    const ModeAndSpread ms = kde_mode_and_spread(kde_index(sps, k, cfg.kappa, cfg.kde_height, cfg.kde_width));
    double& base = kernel_spread[static_cast<std::size_t>(ms.pixel.row)];
    if (base < 0) {
      ScanpathSet one;
      one.scanpaths.push_back(Scanpath{{latlon_to_unit(ms.mode)}});
      base = kde_mode_and_spread(kde_index(one, 0, cfg.kappa, cfg.kde_height, cfg.kde_width)).spread;
    }
    modes[k] = latlon_to_unit(ms.mode);
    frames[k].t = static_cast<double>(k) / hz;
    const double excess = std::max(0.0, ms.spread - base);
    frames[k].fov_deg = std::clamp(cfg.fov_a * rad_to_deg(excess) + cfg.fov_b, cfg.fov_min, cfg.fov_max);
  }
  // Centers chase the mode along great circles, capped at the pan rate.
  const double max_step = deg_to_rad(cfg.max_pan_deg_per_s) / hz;
  UnitVec3 cur = modes[0];
  for (std::size_t k = 0; k < length; ++k) {
    if (k > 0) {
      const double d = spherical_distance(cur, modes[k]);
      cur = d <= max_step ? modes[k] : slerp(cur, modes[k], max_step / d);
    }
    frames[k].center = unit_to_latlon(cur);
  }
  // Centered moving average of the fov; the window shrinks at the ends.
  std::vector<double> raw(length);
  for (std::size_t k = 0; k < length; ++k) raw[k] = frames[k].fov_deg;
  const int half = cfg.fov_window / 2;
  for (std::size_t k = 0; k < length; ++k) {
    double acc = 0.0;
    int count = 0;
    for (int d = -half; d <= half; ++d) {
      const long idx = static_cast<long>(k) + d;
      if (idx < 0 || idx >= static_cast<long>(length)) continue;
      acc += raw[static_cast<std::size_t>(idx)];
      ++count;
    }
    frames[k].fov_deg = std::clamp(acc / count, cfg.fov_min, cfg.fov_max);
  }
  return frames;
}

/// Generates cfg.n scanpaths for the panorama and derives the trajectory.
inline std::vector<TrajectoryFrame> thumbnail_trajectory(const EquirectImage& img, const ScanGan& model,
                                                         const ThumbnailConfig& cfg) {
  return trajectory_from_scanpaths(generate(img, cfg.n, model, cfg.seed, cfg.threads), cfg);
}

/// `factor` frames per input interval, centers by slerp, fov linearly.
inline std::vector<TrajectoryFrame> upsample_trajectory(const std::vector<TrajectoryFrame>& frames, int factor) {
  if (factor < 1) throw std::invalid_argument("upsample_trajectory: factor must be >= 1");
  if (frames.size() < 2 || factor == 1) return frames;
  std::vector<TrajectoryFrame> out;
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    const UnitVec3 a = latlon_to_unit(frames[k].center), b = latlon_to_unit(frames[k + 1].center);
    for (int s = 0; s < factor; ++s) {
      const double f = static_cast<double>(s) / factor;
      out.push_back({frames[k].t + f * (frames[k + 1].t - frames[k].t), unit_to_latlon(slerp(a, b, f)),
                     frames[k].fov_deg + f * (frames[k + 1].fov_deg - frames[k].fov_deg)});
    }
  }
  out.push_back(frames.back());
  return out;
}

/// Tangent-plane coordinates of output pixel (row, col) for a viewport of
/// horizontal fov `fov_deg`; row 0 is up.
inline TangentCoords viewport_tangent(int row, int col, int out_h, int out_w, double fov_deg) {
  const double f = 0.5 * out_w / std::tan(0.5 * deg_to_rad(fov_deg));
  return {(col + 0.5 - 0.5 * out_w) / f, (0.5 * out_h - (row + 0.5)) / f};
}

/// Rectilinear view of the panorama around frame.center.
inline EquirectImage render_viewport(const EquirectImage& img, const TrajectoryFrame& frame, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw std::invalid_argument("render_viewport: output size must be positive");
  if (!(frame.fov_deg > 0 && frame.fov_deg < 180)) throw std::invalid_argument("render_viewport: fov must be in (0, 180)");
  if (img.empty()) throw std::invalid_argument("render_viewport: empty panorama");
  EquirectImage out(out_h, out_w);
  for (int r = 0; r < out_h; ++r)
    for (int c = 0; c < out_w; ++c) {
      const GazePoint p = gnomonic_unproject(frame.center, viewport_tangent(r, c, out_h, out_w, frame.fov_deg));
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = sample_bilinear(img, p, ch);
    }
  return out;
}

}  // namespace scankit
