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

// Desk-scale conditional GAN for 360-degree scanpaths.
//
// Both networks have an image branch (CoordConv channels, two sphere-sampled
// aggregation layers, two dense layers) and a vector branch; the generator
// maps (z, image features) to T raw 3D triplets that are projected onto the
// unit sphere, the discriminator maps (scanpath, image features) to a
// probability. The generator objective adds the spherical soft-DTW term to
// the adversarial term.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "scankit/image.hpp"
#include "scankit/metrics.hpp"
#include "scankit/nn.hpp"
#include "scankit/random.hpp"
#include "scankit/sphere.hpp"
#include "scankit/timewarp.hpp"

namespace scankit {

struct ModelConfig {
  int image_height = 64;
  int image_width = 128;
  int kernel = 3;
  int conv1_stride = 4;
  int conv1_channels = 8;
  int conv2_stride = 4;
  int conv2_channels = 16;
  std::size_t feature_hidden = 64;
  std::size_t feature_dim = 64;
  std::size_t latent_dim = 32;
  std::vector<std::size_t> generator_hidden{128, 128};
  std::vector<std::size_t> discriminator_hidden{128, 64};
  std::size_t length = kCanonicalScanpathLength;
  bool coordconv = true;

  bool operator==(const ModelConfig&) const = default;
};

struct TrainConfig {
  ModelConfig model;
  double lr_g = 1e-4;
  double lr_d = 1e-5;
  double beta1 = 0.5;
  double beta2 = 0.99;
  double adam_eps = 1e-8;
  std::size_t batch = 8;
  int gen_cycles_per_disc = 2;
  double lambda_dtw = 0.1;
  double gamma = 1.0;
  int epochs = 10;
  std::int64_t max_steps = 0;  ///< 0 = no cap
  std::uint64_t seed = 0;
  int augment_variants = 6;   ///< 0 disables longitudinal-shift augmentation
  bool non_saturating = false;
  std::size_t val_samples = 8;

  void validate() const {
    if (!(lr_g > 0 && lr_d > 0)) throw std::invalid_argument("TrainConfig: learning rates must be positive");
    if (!(lambda_dtw >= 0)) throw std::invalid_argument("TrainConfig: lambda_dtw must be >= 0");
    if (!(gamma > 0)) throw std::invalid_argument("TrainConfig: gamma must be > 0 for training");
    if (batch == 0) throw std::invalid_argument("TrainConfig: batch must be positive");
    if (gen_cycles_per_disc < 1) throw std::invalid_argument("TrainConfig: gen_cycles_per_disc must be >= 1");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  }
};

using LatentCode = std::vector<double>;

inline LatentCode draw_latent(std::mt19937_64& rng, std::size_t dim) {
  LatentCode z(dim);
  for (double& v : z) v = uniform(rng, -1.0, 1.0);
  return z;
}

/// RGB plus two coordinate channels: column and row positions mapped
/// linearly onto [-1, 1].
inline nn::FeatureMap coordconv_concat(const EquirectImage& img, bool with_coords = true) {
  const int h = img.height(), w = img.width();
  nn::FeatureMap x(h, w, with_coords ? 5 : 3);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < 3; ++ch) x.at(r, c, ch) = img.at(r, c, ch);
      if (!with_coords) continue;
      x.at(r, c, 3) = w > 1 ? -1.0 + 2.0 * c / (w - 1) : 0.0;
      x.at(r, c, 4) = h > 1 ? -1.0 + 2.0 * r / (h - 1) : 0.0;
    }
  return x;
}

/// Image branch shared in structure (not in weights) by both networks.
struct FeatureExtractor {
  nn::SphereConv conv1;
  nn::SphereConv conv2;
  nn::Mlp dense;

  struct Cache {
    std::vector<double> patches1, patches2;
    nn::FeatureMap pre1, act1, pre2, act2;
    nn::Mlp::Cache dense;
  };

  static FeatureExtractor create(nn::ParameterStore& store, const std::string& name, const ModelConfig& cfg,
                                 std::mt19937_64& rng) {
    FeatureExtractor f;
    const int in_c = cfg.coordconv ? 5 : 3;
    f.conv1 = nn::SphereConv::create(store, name + ".conv1", cfg.image_height, cfg.image_width, in_c,
                                     cfg.conv1_stride, cfg.conv1_channels, cfg.kernel, rng);
    f.conv2 = nn::SphereConv::create(store, name + ".conv2", f.conv1.out_h, f.conv1.out_w, cfg.conv1_channels,
                                     cfg.conv2_stride, cfg.conv2_channels, cfg.kernel, rng);
    const std::size_t flat = f.conv2.out_cells() * static_cast<std::size_t>(cfg.conv2_channels);
    f.dense = nn::Mlp::create(store, name + ".dense", {flat, cfg.feature_hidden, cfg.feature_dim}, rng);
    return f;
  }

  std::vector<double> forward(const nn::ParameterStore& store, const nn::FeatureMap& x, Cache& c) const {
    if (x.height != conv1.in_h || x.width != conv1.in_w || x.channels != conv1.in_c)
      throw std::invalid_argument("feature_extract: input shape does not match the model");
    c.pre1 = conv1.forward(store, x, c.patches1);
    c.act1 = c.pre1;
    nn::leaky_relu(c.act1.data);
    c.pre2 = conv2.forward(store, c.act1, c.patches2);
    c.act2 = c.pre2;
    nn::leaky_relu(c.act2.data);
    return dense.forward(store, c.act2.data, c.dense);
  }

  void backward(nn::ParameterStore& store, const Cache& c, std::span<const double> d_features) const {
    const std::vector<double> d_flat = dense.backward(store, c.dense, d_features);
    nn::FeatureMap d2(conv2.out_h, conv2.out_w, conv2.out_c);
    d2.data = d_flat;
    nn::leaky_relu_backward(c.pre2.data, d2.data);
    nn::FeatureMap d_act1;
    conv2.backward(store, c.patches2, d2, &d_act1);
    nn::leaky_relu_backward(c.pre1.data, d_act1.data);
    conv1.backward(store, c.patches1, d_act1, nullptr);
  }
};

inline std::vector<double> feature_extract(const FeatureExtractor& f, const nn::ParameterStore& store,
                                           const nn::FeatureMap& x) {
  FeatureExtractor::Cache c;
  return f.forward(store, x, c);
}

/// Smoothing term in the sphere projection r / sqrt(|r|^2 + eps^2).
inline constexpr double kProjectionEps = 1e-6;

struct ScanGan {
  ModelConfig config;
  nn::ParameterStore gen_params;
  nn::ParameterStore disc_params;
  FeatureExtractor gen_features;
  nn::Mlp gen_head;
  FeatureExtractor disc_features;
  nn::Mlp disc_head;

  /// Seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
  static ScanGan create(const ModelConfig& cfg, std::uint64_t seed) {
    ScanGan m;
    m.config = cfg;
    std::mt19937_64 grng(derive_seed(seed, 0x6E6E)), drng(derive_seed(seed, 0xD15C));
    m.gen_features = FeatureExtractor::create(m.gen_params, "gen.features", cfg, grng);
    std::vector<std::size_t> gw{cfg.latent_dim + cfg.feature_dim};
    gw.insert(gw.end(), cfg.generator_hidden.begin(), cfg.generator_hidden.end());
    gw.push_back(3 * cfg.length);
    m.gen_head = nn::Mlp::create(m.gen_params, "gen.head", gw, grng);

    m.disc_features = FeatureExtractor::create(m.disc_params, "disc.features", cfg, drng);
    std::vector<std::size_t> dw{3 * cfg.length + cfg.feature_dim};
    dw.insert(dw.end(), cfg.discriminator_hidden.begin(), cfg.discriminator_hidden.end());
    dw.push_back(1);
    m.disc_head = nn::Mlp::create(m.disc_params, "disc.head", dw, drng);
    return m;
  }

  /// Panorama at model resolution with coordinate channels.
  nn::FeatureMap prepare_input(const EquirectImage& img) const {
    return coordconv_concat(resize_equirect(enforce_equirect_aspect(img), config.image_height, config.image_width),
                            config.coordconv);
  }
};

// ---------------------------------------------------------------------------
// Generator / discriminator forward passes

struct GeneratorCache {
  nn::Mlp::Cache head;
  std::vector<double> raw;
};

inline Vec3 project_to_sphere(const Vec3& r) {
  return r * (1.0 / std::sqrt(r.dot(r) + kProjectionEps * kProjectionEps));
}

/// Backprop through project_to_sphere: J^T g with J = I/s - r r^T / s^3.
inline Vec3 project_to_sphere_backward(const Vec3& r, const Vec3& g) {
  const double s2 = r.dot(r) + kProjectionEps * kProjectionEps;
  const double s = std::sqrt(s2);
  return g * (1.0 / s) - r * (r.dot(g) / (s2 * s));
}

inline Scanpath generator_forward_cached(const ScanGan& m, const LatentCode& z, std::span<const double> features,
                                         GeneratorCache& cache) {
  if (z.size() != m.config.latent_dim) throw std::invalid_argument("generator_forward: latent size mismatch");
  if (features.size() != m.config.feature_dim) throw std::invalid_argument("generator_forward: feature size mismatch");
  std::vector<double> in(z.begin(), z.end());
  in.insert(in.end(), features.begin(), features.end());
  cache.raw = m.gen_head.forward(m.gen_params, in, cache.head);
  Scanpath sp;
  sp.points.reserve(m.config.length);
  for (std::size_t t = 0; t < m.config.length; ++t)
    sp.points.push_back(project_to_sphere({cache.raw[3 * t], cache.raw[3 * t + 1], cache.raw[3 * t + 2]}));
  return sp;
}

inline Scanpath generator_forward(const ScanGan& m, const LatentCode& z, std::span<const double> features) {
  GeneratorCache cache;
  return generator_forward_cached(m, z, features, cache);
}

inline constexpr double kProbabilityClamp = 1e-7;

struct DiscriminatorCache {
  nn::Mlp::Cache head;
  double sigmoid = 0.5;
  double prob = 0.5;
};

inline double discriminator_forward_cached(const ScanGan& m, const Scanpath& sp, std::span<const double> features,
                                           DiscriminatorCache& cache) {
  if (sp.size() != m.config.length) throw std::invalid_argument("discriminator_forward: scanpath length mismatch");
  if (features.size() != m.config.feature_dim)
    throw std::invalid_argument("discriminator_forward: feature size mismatch");
  std::vector<double> in;
  in.reserve(3 * sp.size() + features.size());
  for (const auto& p : sp.points) in.insert(in.end(), {p.x, p.y, p.z});
  in.insert(in.end(), features.begin(), features.end());
  const double logit = m.disc_head.forward(m.disc_params, in, cache.head)[0];
  cache.sigmoid = 1.0 / (1.0 + std::exp(-logit));
  cache.prob = std::clamp(cache.sigmoid, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return cache.prob;
}

inline double discriminator_forward(const ScanGan& m, const Scanpath& sp, std::span<const double> features) {
  DiscriminatorCache cache;
  return discriminator_forward_cached(m, sp, features, cache);
}

/// d loss / d scanpath coordinates given d loss / d probability. Accumulates
/// into the discriminator parameter gradients as a side effect.
inline std::vector<double> discriminator_backward(ScanGan& m, const DiscriminatorCache& cache, double d_prob,
                                                  std::vector<double>* d_features = nullptr) {
  const bool clamped = cache.sigmoid != cache.prob;
  const double d_logit = clamped ? 0.0 : d_prob * cache.sigmoid * (1.0 - cache.sigmoid);
  std::vector<double> d_in = m.disc_head.backward(m.disc_params, cache.head, std::span<const double>(&d_logit, 1));
  const std::size_t n = 3 * m.config.length;
  if (d_features) d_features->assign(d_in.begin() + static_cast<std::ptrdiff_t>(n), d_in.end());
  d_in.resize(n);
  return d_in;
}

// ---------------------------------------------------------------------------
// Losses

/// Adversarial generator term: mean log(1 - D(fake)), or mean -log D(fake)
/// in the non-saturating variant.
inline double adversarial_generator_loss(std::span<const double> d_fake, bool non_saturating = false) {
  if (d_fake.empty()) throw std::invalid_argument("loss_generator: empty batch");
  double total = 0.0;
  for (double d : d_fake) total += non_saturating ? -std::log(d) : std::log(1.0 - d);
  return total / static_cast<double>(d_fake.size());
}

/// Mean spherical soft-DTW between paired scanpaths. gamma == 0 is hard DTW.
inline double mean_soft_dtw(const std::vector<Scanpath>& gen, const std::vector<Scanpath>& gt, double gamma) {
  if (gen.size() != gt.size() || gen.empty()) throw std::invalid_argument("loss_generator: batch size mismatch");
  double total = 0.0;
  for (std::size_t b = 0; b < gen.size(); ++b) total += soft_dtw_spherical(gen[b], gt[b], {gamma});
  return total / static_cast<double>(gen.size());
}

/// Generator objective: adversarial term + lambda_dtw * mean soft-DTW to the
/// paired ground truth.
inline double loss_generator(std::span<const double> d_fake, const std::vector<Scanpath>& gen,
                             const std::vector<Scanpath>& gt, const TrainConfig& cfg) {
  const double adv = adversarial_generator_loss(d_fake, cfg.non_saturating);
  if (cfg.lambda_dtw == 0.0) return adv;
  return adv + cfg.lambda_dtw * mean_soft_dtw(gen, gt, cfg.gamma);
}

/// mean log D(real) + mean log(1 - D(fake)); the discriminator ascends it.
inline double loss_discriminator(std::span<const double> d_real, std::span<const double> d_fake) {
  if (d_real.empty() || d_fake.empty()) throw std::invalid_argument("loss_discriminator: empty batch");
  double real = 0.0, fake = 0.0;
  for (double d : d_real) real += std::log(d);
  for (double d : d_fake) fake += std::log(1.0 - d);
  return real / static_cast<double>(d_real.size()) + fake / static_cast<double>(d_fake.size());
}

struct GeneratorStep {
  double loss = 0.0;
  double adversarial = 0.0;
  double dtw = 0.0;
  std::vector<Scanpath> generated;
};

/// Generator objective for one mini-batch sharing one image. With
/// `with_grad`, leaves d loss / d theta_G in gen_params grads (zeroed first);
/// discriminator grads are clobbered.
inline GeneratorStep generator_loss_and_grad(ScanGan& m, const nn::FeatureMap& input,
                                             const std::vector<LatentCode>& latents,
                                             const std::vector<const Scanpath*>& paired_gt, const TrainConfig& cfg,
                                             bool with_grad = true) {
  if (latents.empty() || latents.size() != paired_gt.size())
    throw std::invalid_argument("generator_loss_and_grad: batch size mismatch");
  const std::size_t batch = latents.size();
  const double inv_b = 1.0 / static_cast<double>(batch);

  FeatureExtractor::Cache gfc, dfc;
  const std::vector<double> gfeat = m.gen_features.forward(m.gen_params, input, gfc);
  const std::vector<double> dfeat = m.disc_features.forward(m.disc_params, input, dfc);

  GeneratorStep out;
  std::vector<GeneratorCache> gcache(batch);
  std::vector<DiscriminatorCache> dcache(batch);
  std::vector<double> d_fake(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    out.generated.push_back(generator_forward_cached(m, latents[b], gfeat, gcache[b]));
    d_fake[b] = discriminator_forward_cached(m, out.generated[b], dfeat, dcache[b]);
  }
  out.adversarial = adversarial_generator_loss(d_fake, cfg.non_saturating);
  std::vector<SoftDtwGradient> dtw(batch);
  if (cfg.lambda_dtw != 0.0) {
    double total = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      if (with_grad) {
        dtw[b] = soft_dtw_spherical_value_and_grad(out.generated[b], *paired_gt[b], {cfg.gamma});
        total += dtw[b].value;
      } else {
        total += soft_dtw_spherical(out.generated[b], *paired_gt[b], {cfg.gamma});
      }
    }
    out.dtw = total * inv_b;
  }
  out.loss = out.adversarial + cfg.lambda_dtw * out.dtw;
  if (!with_grad) return out;

  m.gen_params.zero_grad();
  std::vector<double> d_gfeat(gfeat.size(), 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double d_prob = cfg.non_saturating ? -inv_b / d_fake[b] : -inv_b / (1.0 - d_fake[b]);
    std::vector<double> d_points = discriminator_backward(m, dcache[b], d_prob);
    if (cfg.lambda_dtw != 0.0)
      for (std::size_t t = 0; t < m.config.length; ++t) {
        const Vec3& g = dtw[b].d_first[t];
        d_points[3 * t] += cfg.lambda_dtw * inv_b * g.x;
        d_points[3 * t + 1] += cfg.lambda_dtw * inv_b * g.y;
        d_points[3 * t + 2] += cfg.lambda_dtw * inv_b * g.z;
      }
    std::vector<double> d_raw(3 * m.config.length);
    for (std::size_t t = 0; t < m.config.length; ++t) {
      const Vec3 r{gcache[b].raw[3 * t], gcache[b].raw[3 * t + 1], gcache[b].raw[3 * t + 2]};
      const Vec3 g = project_to_sphere_backward(r, {d_points[3 * t], d_points[3 * t + 1], d_points[3 * t + 2]});
      d_raw[3 * t] = g.x, d_raw[3 * t + 1] = g.y, d_raw[3 * t + 2] = g.z;
    }
    const std::vector<double> d_in = m.gen_head.backward(m.gen_params, gcache[b].head, d_raw);
    for (std::size_t k = 0; k < gfeat.size(); ++k) d_gfeat[k] += d_in[m.config.latent_dim + k];
  }
  m.gen_features.backward(m.gen_params, gfc, d_gfeat);
  return out;
}

struct DiscriminatorStep {
  double objective = 0.0;  ///< loss_discriminator value (ascended)
  double mean_real = 0.0;
  double mean_fake = 0.0;
};

/// Discriminator objective on one mini-batch. With `with_grad`, leaves the
/// gradient of the negated objective (the descent direction) in disc_params.
inline DiscriminatorStep discriminator_loss_and_grad(ScanGan& m, const nn::FeatureMap& input,
                                                     const std::vector<const Scanpath*>& real,
                                                     const std::vector<Scanpath>& fake, bool with_grad = true) {
  if (real.empty() || fake.empty()) throw std::invalid_argument("discriminator_loss_and_grad: empty batch");
  FeatureExtractor::Cache dfc;
  const std::vector<double> dfeat = m.disc_features.forward(m.disc_params, input, dfc);
  std::vector<DiscriminatorCache> rc(real.size()), fc(fake.size());
  std::vector<double> d_real(real.size()), d_fake(fake.size());
  for (std::size_t b = 0; b < real.size(); ++b) d_real[b] = discriminator_forward_cached(m, *real[b], dfeat, rc[b]);
  for (std::size_t b = 0; b < fake.size(); ++b) d_fake[b] = discriminator_forward_cached(m, fake[b], dfeat, fc[b]);
  DiscriminatorStep out;
  out.objective = loss_discriminator(d_real, d_fake);
  for (double d : d_real) out.mean_real += d / static_cast<double>(d_real.size());
  for (double d : d_fake) out.mean_fake += d / static_cast<double>(d_fake.size());
  if (!with_grad) return out;

  m.disc_params.zero_grad();
  std::vector<double> d_feat(dfeat.size(), 0.0), tmp;
  const double inv_r = 1.0 / static_cast<double>(real.size()), inv_f = 1.0 / static_cast<double>(fake.size());
  for (std::size_t b = 0; b < real.size(); ++b) {
    discriminator_backward(m, rc[b], -inv_r / d_real[b], &tmp);
    for (std::size_t k = 0; k < tmp.size(); ++k) d_feat[k] += tmp[k];
  }
  for (std::size_t b = 0; b < fake.size(); ++b) {
    discriminator_backward(m, fc[b], inv_f / (1.0 - d_fake[b]), &tmp);
    for (std::size_t k = 0; k < tmp.size(); ++k) d_feat[k] += tmp[k];
  }
  m.disc_features.backward(m.disc_params, dfc, d_feat);
  return out;
}

// ---------------------------------------------------------------------------
// Data augmentation

struct TrainingExample {
  EquirectImage image;
  ScanpathSet scanpaths;
};

/// Rolls the panorama east by `columns` pixels and rotates every gaze point
/// by the matching longitude.
inline TrainingExample shift_longitude(const EquirectImage& img, const ScanpathSet& sps, int columns) {
  TrainingExample out{roll_columns(img, columns), sps};
  const double angle = kTwoPi * static_cast<double>(columns) / img.width();
  if (columns % img.width() != 0)
    for (auto& sp : out.scanpaths.scanpaths)
      for (auto& p : sp.points) p = rotate_about_z(p, angle);
  return out;
}

struct AugmentedVariant {
  TrainingExample example;
  int column_shift = 0;
};

/// `n` copies of the example, each shifted by a random whole number of
/// columns.
inline std::vector<AugmentedVariant> augment_longitudinal_shift(const EquirectImage& img, const ScanpathSet& sps,
                                                                 int n, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("augment_longitudinal_shift: negative count");
  std::mt19937_64 rng(seed);
  std::vector<AugmentedVariant> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int shift = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(img.width())));
    out.push_back({shift_longitude(img, sps, shift), shift});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation

/// Latent of sample `index` for a generation run seeded with `seed`.
inline LatentCode generation_latent(std::uint64_t seed, std::size_t index, std::size_t dim) {
  std::mt19937_64 rng(derive_seed(seed, index));
  return draw_latent(rng, dim);
}

/// Re-normalizes a generator output to exact unit norm.
inline Scanpath to_unit_scanpath(Scanpath sp) {
  for (auto& p : sp.points) p = p.normalized();
  return sp;
}

/// `n` scanpaths from independent latents. Sample k always uses latent
/// stream k, so the result does not depend on `threads`.
inline ScanpathSet generate(const EquirectImage& img, std::size_t n, const ScanGan& m, std::uint64_t seed,
                            unsigned threads = 1, std::string image_id = {}) {
  const nn::FeatureMap input = m.prepare_input(img);
  const std::vector<double> feat = feature_extract(m.gen_features, m.gen_params, input);
  ScanpathSet out;
  out.image_id = std::move(image_id);
  out.scanpaths.resize(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    GeneratorCache cache;
    for (std::size_t k = begin; k < end; ++k)
      out.scanpaths[k] = to_unit_scanpath(generator_forward_cached(m, generation_latent(seed, k, m.config.latent_dim), feat, cache));
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    work(0, n);
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t b = t * chunk, e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back(work, b, e);
  }
  for (auto& th : pool) th.join();
  return out;
}

// ---------------------------------------------------------------------------
// Training

struct EpochLog {
  int epoch = 0;
  std::int64_t steps = 0;
  double loss_d = 0.0;       ///< mean discriminator objective over the epoch
  double loss_g = 0.0;       ///< mean generator objective over the epoch
  double loss_g_adv = 0.0;
  double loss_g_dtw = 0.0;
  double val_soft_dtw = 0.0;  ///< validation mean spherical soft-DTW (cfg.gamma)
  double val_dtw = 0.0;       ///< validation mean hard spherical DTW
  double seconds = 0.0;
};

inline std::string to_json_line(const EpochLog& e) {
  std::ostringstream os;
  os.precision(10);
  os << "{\"epoch\":" << e.epoch << ",\"steps\":" << e.steps << ",\"loss_d\":" << e.loss_d
     << ",\"loss_g\":" << e.loss_g << ",\"loss_g_adv\":" << e.loss_g_adv << ",\"loss_g_dtw\":" << e.loss_g_dtw
     << ",\"val_soft_dtw\":" << e.val_soft_dtw << ",\"val_dtw\":" << e.val_dtw << "}";
  return os.str();
}

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::string state) : std::runtime_error(what), state_(std::move(state)) {}
  const std::string& state() const { return state_; }

 private:
  std::string state_;
};

struct TrainHooks {
  std::function<void(const EpochLog&)> on_epoch;
  std::function<bool()> should_stop;  ///< polled after every step
};

struct TrainResult {
  ScanGan final_model;
  ScanGan best_model;
  int best_epoch = 0;
  int epochs_completed = 0;
  std::int64_t steps = 0;
  bool interrupted = false;
  std::vector<EpochLog> log;
};

namespace detail {

/// Fixes the length of ground-truth scanpaths to the model length.
inline ScanpathSet fit_length(ScanpathSet s, std::size_t length) {
  for (auto& sp : s.scanpaths)
    if (sp.size() != length) sp = resample_nearest(sp, length);
  return s;
}

struct PreparedExample {
  nn::FeatureMap input;
  ScanpathSet scanpaths;
};

inline std::vector<PreparedExample> prepare(const ScanGan& m, const std::vector<TrainingExample>& data) {
  std::vector<PreparedExample> out;
  for (const auto& ex : data) {
    if (ex.scanpaths.empty()) continue;
    out.push_back({m.prepare_input(ex.image), fit_length(ex.scanpaths, m.config.length)});
  }
  return out;
}

inline std::pair<double, double> validate(ScanGan& m, const std::vector<PreparedExample>& val, const TrainConfig& cfg) {
  double soft = 0.0, hard = 0.0;
  std::size_t pairs = 0;
  for (std::size_t v = 0; v < val.size(); ++v) {
    const std::vector<double> feat = feature_extract(m.gen_features, m.gen_params, val[v].input);
    for (std::size_t k = 0; k < cfg.val_samples; ++k) {
      const LatentCode z = generation_latent(derive_seed(cfg.seed, 0x7A1), v * cfg.val_samples + k, m.config.latent_dim);
      const Scanpath g = generator_forward(m, z, feat);
      for (const auto& gt : val[v].scanpaths.scanpaths) {
        const CostMatrix c = cost_matrix_spherical(g, gt);
        soft += soft_dtw(c, {cfg.gamma});
        hard += dtw_hard(c).value;
        ++pairs;
      }
    }
  }
  if (pairs == 0) return {0.0, 0.0};
  return {soft / static_cast<double>(pairs), hard / static_cast<double>(pairs)};
}

inline std::string describe_state(int epoch, std::int64_t step, double loss_d, double loss_g, const ScanGan& m) {
  std::ostringstream os;
  os << "{\"epoch\":" << epoch << ",\"step\":" << step << ",\"loss_d\":" << loss_d << ",\"loss_g\":" << loss_g
     << ",\"gen_params_finite\":" << (m.gen_params.all_finite() ? "true" : "false")
     << ",\"disc_params_finite\":" << (m.disc_params.all_finite() ? "true" : "false") << "}";
  return os.str();
}

}  // namespace detail

/// Adversarial training with the spherical soft-DTW generator term.
///
/// Every epoch visits each (augmented) image once per mini-batch of
/// cfg.batch ground-truth scanpaths; each mini-batch runs one discriminator
/// update followed by cfg.gen_cycles_per_disc generator updates. Each
/// generated scanpath is paired with one ground-truth scanpath of the same
/// image drawn uniformly at random. `best_model` is the epoch (0 =
/// initialization) with the lowest validation soft-DTW; `validation` falls
/// back to the un-augmented training set when empty.
inline TrainResult train(const std::vector<TrainingExample>& dataset, const TrainConfig& cfg,
                         const std::vector<TrainingExample>& validation = {}, const TrainHooks& hooks = {},
                         std::optional<ScanGan> resume = std::nullopt, int start_epoch = 0) {
  cfg.validate();
  ScanGan model = resume ? std::move(*resume) : ScanGan::create(cfg.model, cfg.seed);

  std::vector<TrainingExample> expanded;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& ex = dataset[i];
    const EquirectImage img =
        resize_equirect(enforce_equirect_aspect(ex.image), cfg.model.image_height, cfg.model.image_width);
    if (cfg.augment_variants == 0) {
      expanded.push_back({img, ex.scanpaths});
      continue;
    }
    for (auto& v : augment_longitudinal_shift(img, ex.scanpaths, cfg.augment_variants, derive_seed(cfg.seed, 0xA000 + i)))
      expanded.push_back(std::move(v.example));
  }
  const std::vector<detail::PreparedExample> train_set = detail::prepare(model, expanded);
  const std::vector<detail::PreparedExample> val_set = detail::prepare(model, validation.empty() ? dataset : validation);
  if (train_set.empty() && cfg.epochs > start_epoch) throw std::invalid_argument("train: empty dataset");

  const nn::AdamConfig adam_g{cfg.lr_g, cfg.beta1, cfg.beta2, cfg.adam_eps};
  const nn::AdamConfig adam_d{cfg.lr_d, cfg.beta1, cfg.beta2, cfg.adam_eps};

  TrainResult result{model, model, start_epoch, start_epoch, 0, false, {}};
  {
    EpochLog init;
    init.epoch = start_epoch;
    std::tie(init.val_soft_dtw, init.val_dtw) = detail::validate(model, val_set, cfg);
    result.log.push_back(init);
    if (hooks.on_epoch) hooks.on_epoch(init);
  }
  double best = result.log.back().val_soft_dtw;
  std::int64_t steps = 0;

  for (int epoch = start_epoch + 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.max_steps > 0 && steps >= cfg.max_steps) break;
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));

    struct Batch {
      std::size_t example;
      std::vector<std::size_t> members;
    };
    std::vector<Batch> batches;
    for (std::size_t e = 0; e < train_set.size(); ++e) {
      std::vector<std::size_t> order(train_set[e].scanpaths.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[uniform_index(rng, k)]);
      for (std::size_t b = 0; b < order.size(); b += cfg.batch)
        batches.push_back({e, std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(b),
                                                       order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), b + cfg.batch)))});
    }
    for (std::size_t k = batches.size(); k > 1; --k) std::swap(batches[k - 1], batches[uniform_index(rng, k)]);

    EpochLog log;
    log.epoch = epoch;
    std::size_t g_updates = 0, d_updates = 0;
    for (const Batch& batch : batches) {
      if (cfg.max_steps > 0 && steps >= cfg.max_steps) break;
      const detail::PreparedExample& ex = train_set[batch.example];
      const std::size_t bsz = batch.members.size();

      std::vector<const Scanpath*> real;
      for (std::size_t idx : batch.members) real.push_back(&ex.scanpaths.scanpaths[idx]);
      std::vector<LatentCode> latents;
      for (std::size_t b = 0; b < bsz; ++b) latents.push_back(draw_latent(rng, model.config.latent_dim));
      std::vector<Scanpath> fake;
      {
        const std::vector<double> gfeat = feature_extract(model.gen_features, model.gen_params, ex.input);
        for (const auto& z : latents) fake.push_back(generator_forward(model, z, gfeat));
      }
      const DiscriminatorStep ds = discriminator_loss_and_grad(model, ex.input, real, fake);
      model.disc_params.adam_step(adam_d);
      log.loss_d += ds.objective;
      ++d_updates;

      for (int cycle = 0; cycle < cfg.gen_cycles_per_disc; ++cycle) {
        std::vector<LatentCode> gz;
        std::vector<const Scanpath*> paired;
        for (std::size_t b = 0; b < bsz; ++b) {
          gz.push_back(draw_latent(rng, model.config.latent_dim));
          paired.push_back(&ex.scanpaths.scanpaths[uniform_index(rng, ex.scanpaths.size())]);
        }
        const GeneratorStep gs = generator_loss_and_grad(model, ex.input, gz, paired, cfg);
        if (!std::isfinite(gs.loss) || !std::isfinite(ds.objective))
          throw TrainingDiverged("train: non-finite loss at epoch " + std::to_string(epoch),
                                 detail::describe_state(epoch, steps, ds.objective, gs.loss, model));
        model.gen_params.adam_step(adam_g);
        log.loss_g += gs.loss;
        log.loss_g_adv += gs.adversarial;
        log.loss_g_dtw += gs.dtw;
        ++g_updates;
      }
      ++steps;
      if (hooks.should_stop && hooks.should_stop()) {
        result.interrupted = true;
        break;
      }
    }
    if (d_updates) log.loss_d /= static_cast<double>(d_updates);
    if (g_updates) {
      log.loss_g /= static_cast<double>(g_updates);
      log.loss_g_adv /= static_cast<double>(g_updates);
      log.loss_g_dtw /= static_cast<double>(g_updates);
    }
    log.steps = steps;
    std::tie(log.val_soft_dtw, log.val_dtw) = detail::validate(model, val_set, cfg);
    if (!std::isfinite(log.val_soft_dtw))
      throw TrainingDiverged("train: non-finite validation loss at epoch " + std::to_string(epoch),
                             detail::describe_state(epoch, steps, log.loss_d, log.loss_g, model));
    result.log.push_back(log);
    if (hooks.on_epoch) hooks.on_epoch(log);
    result.epochs_completed = epoch;
    if (log.val_soft_dtw < best) {
      best = log.val_soft_dtw;
      result.best_model = model;
      result.best_epoch = epoch;
    }
    if (result.interrupted) break;
  }
  result.steps = steps;
  result.final_model = std::move(model);
  return result;
}

}  // namespace scankit
