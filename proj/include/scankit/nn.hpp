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

// Minimal differentiable building blocks for the scanpath GAN: a named
// parameter store with Adam state, dense layers, and the sphere-sampled
// aggregation layer whose taps come from spherical_kernel_grid. Backward
// passes are written by hand; every layer accumulates into Param::grad.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scankit/random.hpp"
#include "scankit/sphere.hpp"

namespace scankit::nn {

struct Param {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<double> m;  ///< Adam first moment
  std::vector<double> v;  ///< Adam second moment

  std::size_t size() const { return value.size(); }
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.99;
  double eps = 1e-8;
};

class ParameterStore {
 public:
  /// Adds a tensor initialized uniformly in (-bound, bound).
  std::size_t add(std::string name, std::vector<std::size_t> shape, double bound, std::mt19937_64& rng) {
    Param p;
    p.name = std::move(name);
    p.shape = std::move(shape);
    std::size_t n = 1;
    for (std::size_t d : p.shape) n *= d;
    p.value.resize(n);
    for (double& x : p.value) x = uniform(rng, -bound, bound);
    p.grad.assign(n, 0.0);
    p.m.assign(n, 0.0);
    p.v.assign(n, 0.0);
    params_.push_back(std::move(p));
    return params_.size() - 1;
  }

  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }
  std::size_t size() const { return params_.size(); }

  const Param* find(const std::string& name) const {
    for (const auto& p : params_)
      if (p.name == name) return &p;
    return nullptr;
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
  }

  bool all_finite() const {
    for (const auto& p : params_)
      for (double x : p.value)
        if (!std::isfinite(x)) return false;
    return true;
  }

  /// One bias-corrected Adam update from the accumulated gradients.
  void adam_step(const AdamConfig& cfg) {
    ++steps_;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(steps_));
    for (auto& p : params_) {
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double g = p.grad[k];
        p.m[k] = cfg.beta1 * p.m[k] + (1.0 - cfg.beta1) * g;
        p.v[k] = cfg.beta2 * p.v[k] + (1.0 - cfg.beta2) * g * g;
        p.value[k] -= cfg.lr * (p.m[k] / c1) / (std::sqrt(p.v[k] / c2) + cfg.eps);
      }
    }
  }

  std::int64_t steps() const { return steps_; }
  void set_steps(std::int64_t s) { steps_ = s; }

 private:
  std::vector<Param> params_;
  std::int64_t steps_ = 0;
};

inline constexpr double kLeakySlope = 0.2;

inline void leaky_relu(std::span<double> x) {
  for (double& v : x)
    if (v < 0.0) v *= kLeakySlope;
}

/// In-place: turns d(activation) into d(pre-activation).
inline void leaky_relu_backward(std::span<const double> pre, std::span<double> grad) {
  for (std::size_t k = 0; k < grad.size(); ++k)
    if (pre[k] < 0.0) grad[k] *= kLeakySlope;
}

struct Dense {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight = 0;
  std::size_t bias = 0;

  static Dense create(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
                      std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Dense d;
    d.in = in;
    d.out = out;
    d.weight = store.add(name + ".weight", {out, in}, bound, rng);
    d.bias = store.add(name + ".bias", {out}, bound, rng);
    return d;
  }

  void forward(const ParameterStore& store, std::span<const double> x, std::span<double> y) const {
    const auto& w = store[weight].value;
    const auto& b = store[bias].value;
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = &w[o * in];
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
      y[o] = acc;
    }
  }

  /// Accumulates parameter gradients; writes d x when `dx` is non-empty.
  void backward(ParameterStore& store, std::span<const double> x, std::span<const double> dy,
                std::span<double> dx) const {
    auto& gw = store[weight].grad;
    auto& gb = store[bias].grad;
    const auto& w = store[weight].value;
    if (!dx.empty()) std::fill(dx.begin(), dx.end(), 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double g = dy[o];
      if (g == 0.0) continue;
      gb[o] += g;
      double* grow = &gw[o * in];
      for (std::size_t i = 0; i < in; ++i) grow[i] += g * x[i];
      if (!dx.empty()) {
        const double* row = &w[o * in];
        for (std::size_t i = 0; i < in; ++i) dx[i] += g * row[i];
      }
    }
  }
};

/// Dense stack with leaky-ReLU on every hidden layer and a linear output.
struct Mlp {
  std::vector<Dense> layers;

  struct Cache {
    std::vector<std::vector<double>> inputs;  ///< input of each layer (post-activation)
    std::vector<std::vector<double>> pre;     ///< pre-activation of each layer
  };

  static Mlp create(ParameterStore& store, const std::string& name, const std::vector<std::size_t>& widths,
                    std::mt19937_64& rng) {
    Mlp m;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k)
      m.layers.push_back(Dense::create(store, name + "." + std::to_string(k), widths[k], widths[k + 1], rng));
    return m;
  }

  std::size_t in() const { return layers.front().in; }
  std::size_t out() const { return layers.back().out; }

  std::vector<double> forward(const ParameterStore& store, std::span<const double> x, Cache& cache) const {
    cache.inputs.assign(layers.size(), {});
    cache.pre.assign(layers.size(), {});
    std::vector<double> cur(x.begin(), x.end());
    for (std::size_t k = 0; k < layers.size(); ++k) {
      cache.inputs[k] = cur;
      std::vector<double> y(layers[k].out);
      layers[k].forward(store, cur, y);
      cache.pre[k] = y;
      if (k + 1 < layers.size()) leaky_relu(y);
      cur = std::move(y);
    }
    return cur;
  }

  /// Returns d loss / d input.
  std::vector<double> backward(ParameterStore& store, const Cache& cache, std::span<const double> d_out) const {
    std::vector<double> grad(d_out.begin(), d_out.end());
    for (std::size_t k = layers.size(); k-- > 0;) {
      if (k + 1 < layers.size()) leaky_relu_backward(cache.pre[k], grad);
      std::vector<double> dx(layers[k].in);
      layers[k].backward(store, cache.inputs[k], grad, dx);
      grad = std::move(dx);
    }
    return grad;
  }
};

/// Channel-interleaved H x W x C activation on an equirectangular lattice.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int h, int w, int c) : height(h), width(w), channels(c), data(static_cast<std::size_t>(h) * w * c, 0.0) {}
  double& at(int r, int col, int ch) { return data[(static_cast<std::size_t>(r) * width + col) * channels + ch]; }
  double at(int r, int col, int ch) const { return data[(static_cast<std::size_t>(r) * width + col) * channels + ch]; }
};

/// Strided aggregation over an equirectangular lattice. Each output cell
/// gathers a k x k patch whose taps are the gnomonic kernel grid centered at
/// the cell, read from the input by bilinear interpolation with longitude
/// wrap, then applies one affine map shared by all cells.
struct SphereConv {
  struct Tap {
    std::uint32_t cell = 0;  ///< input lattice index row * in_w + col
    double weight = 0.0;
  };

  int in_h = 0, in_w = 0, in_c = 0;
  int out_h = 0, out_w = 0, out_c = 0;
  int kernel = 3;
  double angular_step = 0.0;
  std::size_t weight = 0;
  std::size_t bias = 0;
  std::vector<Tap> taps;  ///< out cells x kernel^2 x 4 bilinear corners

  std::size_t patch_size() const { return static_cast<std::size_t>(kernel) * kernel * in_c; }
  std::size_t out_cells() const { return static_cast<std::size_t>(out_h) * out_w; }

  static SphereConv create(ParameterStore& store, const std::string& name, int in_h, int in_w, int in_c, int stride,
                           int out_c, int kernel, std::mt19937_64& rng) {
    if (stride <= 0 || in_h % stride != 0 || in_w % stride != 0)
      throw std::invalid_argument("SphereConv: stride must divide the input lattice");
    SphereConv l;
    l.in_h = in_h, l.in_w = in_w, l.in_c = in_c;
    l.out_h = in_h / stride, l.out_w = in_w / stride, l.out_c = out_c;
    l.kernel = kernel;
    // One output cell of latitude per tap, capped so the kernel stays well
    // inside the tangent hemisphere on coarse lattices.
    l.angular_step = std::min(kPi / l.out_h, 0.9 * kHalfPi / kernel);
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.patch_size()));
    l.weight = store.add(name + ".weight", {static_cast<std::size_t>(out_c), l.patch_size()}, bound, rng);
    l.bias = store.add(name + ".bias", {static_cast<std::size_t>(out_c)}, bound, rng);
    l.build_taps();
    return l;
  }

  void build_taps() {
    taps.clear();
    taps.reserve(out_cells() * kernel * kernel * 4);
    for (int r = 0; r < out_h; ++r)
      for (int c = 0; c < out_w; ++c) {
        const GazePoint center = equirect_pixel_to_latlon(r, c, out_h, out_w);
        for (const GazePoint& p : spherical_kernel_grid(center, kernel, angular_step)) {
          const RasterCoords rc = latlon_to_equirect(p, in_h, in_w);
          const double row = std::clamp(rc.row, 0.0, static_cast<double>(in_h - 1));
          const int r0 = std::min(static_cast<int>(std::floor(row)), in_h - 1);
          const int r1 = std::min(r0 + 1, in_h - 1);
          const double fr = row - r0;
          const double cf = std::floor(rc.col);
          const double fc = rc.col - cf;
          const int c0 = ((static_cast<int>(cf) % in_w) + in_w) % in_w;
          const int c1 = (c0 + 1) % in_w;
          auto cell = [&](int rr, int cc) { return static_cast<std::uint32_t>(rr * in_w + cc); };
          taps.push_back({cell(r0, c0), (1 - fr) * (1 - fc)});
          taps.push_back({cell(r0, c1), (1 - fr) * fc});
          taps.push_back({cell(r1, c0), fr * (1 - fc)});
          taps.push_back({cell(r1, c1), fr * fc});
        }
      }
  }

  /// Gathers all patches; patches has out_cells x patch_size entries.
  void gather(const FeatureMap& input, std::vector<double>& patches) const {
    const std::size_t kk = static_cast<std::size_t>(kernel) * kernel;
    patches.assign(out_cells() * patch_size(), 0.0);
    for (std::size_t cell = 0; cell < out_cells(); ++cell) {
      double* patch = &patches[cell * patch_size()];
      for (std::size_t t = 0; t < kk; ++t) {
        for (int corner = 0; corner < 4; ++corner) {
          const Tap& tap = taps[(cell * kk + t) * 4 + corner];
          if (tap.weight == 0.0) continue;
          const double* src = &input.data[static_cast<std::size_t>(tap.cell) * in_c];
          for (int ch = 0; ch < in_c; ++ch) patch[t * in_c + ch] += tap.weight * src[ch];
        }
      }
    }
  }

  /// Pre-activation output (no nonlinearity).
  FeatureMap forward(const ParameterStore& store, const FeatureMap& input, std::vector<double>& patches) const {
    gather(input, patches);
    FeatureMap out(out_h, out_w, out_c);
    const auto& w = store[weight].value;
    const auto& b = store[bias].value;
    const std::size_t ps = patch_size();
    for (std::size_t cell = 0; cell < out_cells(); ++cell) {
      const double* patch = &patches[cell * ps];
      for (int o = 0; o < out_c; ++o) {
        double acc = b[o];
        const double* row = &w[o * ps];
        for (std::size_t i = 0; i < ps; ++i) acc += row[i] * patch[i];
        out.data[cell * out_c + o] = acc;
      }
    }
    return out;
  }

  /// Accumulates parameter gradients; returns d input when requested.
  void backward(ParameterStore& store, const std::vector<double>& patches, const FeatureMap& d_out,
                FeatureMap* d_input) const {
    auto& gw = store[weight].grad;
    auto& gb = store[bias].grad;
    const auto& w = store[weight].value;
    const std::size_t ps = patch_size();
    const std::size_t kk = static_cast<std::size_t>(kernel) * kernel;
    std::vector<double> d_patch(ps);
    if (d_input) *d_input = FeatureMap(in_h, in_w, in_c);
    for (std::size_t cell = 0; cell < out_cells(); ++cell) {
      const double* patch = &patches[cell * ps];
      std::fill(d_patch.begin(), d_patch.end(), 0.0);
      for (int o = 0; o < out_c; ++o) {
        const double g = d_out.data[cell * out_c + o];
        if (g == 0.0) continue;
        gb[o] += g;
        double* grow = &gw[o * ps];
        const double* row = &w[o * ps];
        for (std::size_t i = 0; i < ps; ++i) {
          grow[i] += g * patch[i];
          d_patch[i] += g * row[i];
        }
      }
      if (!d_input) continue;
      for (std::size_t t = 0; t < kk; ++t)
        for (int corner = 0; corner < 4; ++corner) {
          const Tap& tap = taps[(cell * kk + t) * 4 + corner];
          if (tap.weight == 0.0) continue;
          double* dst = &d_input->data[static_cast<std::size_t>(tap.cell) * in_c];
          for (int ch = 0; ch < in_c; ++ch) dst[ch] += tap.weight * d_patch[t * in_c + ch];
        }
    }
  }
};

}  // namespace scankit::nn
