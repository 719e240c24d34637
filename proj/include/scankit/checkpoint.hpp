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

// Versioned binary container for ScanGan parameters.
//
//   bytes 0..7   magic "SCANKIT\0"
//   u32          format version
//   u32          header length N
//   N bytes      JSON header: model config, train config echo, epoch,
//                adam step counts, tensor table (name, shape, offset)
//   payload      little-endian float32; per tensor: value, then Adam m, v
//
// Offsets in the tensor table count float32 elements from payload start.

#pragma once

#include <bit>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "scankit/gan.hpp"

namespace scankit {

inline constexpr char kCheckpointMagic[8] = {'S', 'C', 'A', 'N', 'K', 'I', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json to_json(const ModelConfig& c) {
  return {{"image_height", c.image_height},     {"image_width", c.image_width},
          {"kernel", c.kernel},                 {"conv1_stride", c.conv1_stride},
          {"conv1_channels", c.conv1_channels}, {"conv2_stride", c.conv2_stride},
          {"conv2_channels", c.conv2_channels}, {"feature_hidden", c.feature_hidden},
          {"feature_dim", c.feature_dim},       {"latent_dim", c.latent_dim},
          {"generator_hidden", c.generator_hidden}, {"discriminator_hidden", c.discriminator_hidden},
          {"length", c.length},                 {"coordconv", c.coordconv}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.image_height = j.at("image_height").get<int>();
  c.image_width = j.at("image_width").get<int>();
  c.kernel = j.at("kernel").get<int>();
  c.conv1_stride = j.at("conv1_stride").get<int>();
  c.conv1_channels = j.at("conv1_channels").get<int>();
  c.conv2_stride = j.at("conv2_stride").get<int>();
  c.conv2_channels = j.at("conv2_channels").get<int>();
  c.feature_hidden = j.at("feature_hidden").get<std::size_t>();
  c.feature_dim = j.at("feature_dim").get<std::size_t>();
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.generator_hidden = j.at("generator_hidden").get<std::vector<std::size_t>>();
  c.discriminator_hidden = j.at("discriminator_hidden").get<std::vector<std::size_t>>();
  c.length = j.at("length").get<std::size_t>();
  c.coordconv = j.at("coordconv").get<bool>();
  return c;
}

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"model", to_json(c.model)},
          {"lr_g", c.lr_g},
          {"lr_d", c.lr_d},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"adam_eps", c.adam_eps},
          {"batch", c.batch},
          {"gen_cycles_per_disc", c.gen_cycles_per_disc},
          {"lambda_dtw", c.lambda_dtw},
          {"gamma", c.gamma},
          {"epochs", c.epochs},
          {"max_steps", c.max_steps},
          {"seed", c.seed},
          {"augment_variants", c.augment_variants},
          {"non_saturating", c.non_saturating},
          {"val_samples", c.val_samples}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.model = model_config_from_json(j.at("model"));
  c.lr_g = j.at("lr_g").get<double>();
  c.lr_d = j.at("lr_d").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.adam_eps = j.at("adam_eps").get<double>();
  c.batch = j.at("batch").get<std::size_t>();
  c.gen_cycles_per_disc = j.at("gen_cycles_per_disc").get<int>();
  c.lambda_dtw = j.at("lambda_dtw").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.max_steps = j.at("max_steps").get<std::int64_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.augment_variants = j.at("augment_variants").get<int>();
  c.non_saturating = j.at("non_saturating").get<bool>();
  c.val_samples = j.at("val_samples").get<std::size_t>();
  return c;
}

struct Checkpoint {
  ScanGan model;
  std::optional<TrainConfig> train_config;
  int epoch = 0;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

inline std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + k])) << (8 * k);
  return v;
}

inline void put_f32(std::string& out, double v) {
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  put_u32(out, bits);
}

inline double get_f32(const std::string& in, std::size_t at) {
  return static_cast<double>(std::bit_cast<float>(get_u32(in, at)));
}

inline nlohmann::json tensor_table(const nn::ParameterStore& store, std::size_t& offset) {
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t k = 0; k < store.size(); ++k) {
    const nn::Param& p = store[k];
    table.push_back({{"name", p.name}, {"shape", p.shape}, {"offset", offset}});
    offset += 3 * p.size();
  }
  return table;
}

inline void write_payload(std::string& out, const nn::ParameterStore& store) {
  for (std::size_t k = 0; k < store.size(); ++k) {
    const nn::Param& p = store[k];
    for (double v : p.value) put_f32(out, v);
    for (double v : p.m) put_f32(out, v);
    for (double v : p.v) put_f32(out, v);
  }
}

inline void read_store(nn::ParameterStore& store, const nlohmann::json& table, const std::string& bytes,
                       std::size_t payload, std::size_t payload_floats) {
  if (table.size() != store.size()) throw CheckpointError("checkpoint: tensor count does not match model config");
  for (std::size_t k = 0; k < store.size(); ++k) {
    nn::Param& p = store[k];
    const auto& entry = table[k];
    if (entry.at("name").get<std::string>() != p.name || entry.at("shape").get<std::vector<std::size_t>>() != p.shape)
      throw CheckpointError("checkpoint: tensor '" + entry.at("name").get<std::string>() + "' does not match model");
    const std::size_t off = entry.at("offset").get<std::size_t>();
    if (off + 3 * p.size() > payload_floats) throw CheckpointError("checkpoint: truncated payload");
    std::size_t at = payload + 4 * off;
    for (auto* vec : {&p.value, &p.m, &p.v})
      for (double& v : *vec) {
        v = get_f32(bytes, at);
        at += 4;
      }
  }
}

}  // namespace detail

inline std::string checkpoint_to_bytes(const ScanGan& m, const TrainConfig* train = nullptr, int epoch = 0) {
  std::size_t offset = 0;
  nlohmann::json header;
  header["format"] = "scankit-checkpoint";
  header["model"] = to_json(m.config);
  if (train) header["train"] = to_json(*train);
  header["epoch"] = epoch;
  header["adam_steps"] = {{"generator", m.gen_params.steps()}, {"discriminator", m.disc_params.steps()}};
  header["generator"] = detail::tensor_table(m.gen_params, offset);
  header["discriminator"] = detail::tensor_table(m.disc_params, offset);
  header["payload_floats"] = offset;
  const std::string text = header.dump();

  std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  out.reserve(out.size() + 4 * offset);
  detail::write_payload(out, m.gen_params);
  detail::write_payload(out, m.disc_params);
  return out;
}

inline Checkpoint checkpoint_from_bytes(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0)
    throw CheckpointError("checkpoint: bad magic");
  const std::uint32_t version = detail::get_u32(bytes, 8);
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint: unsupported format version " + std::to_string(version));
  const std::uint32_t hlen = detail::get_u32(bytes, 12);
  if (16 + static_cast<std::size_t>(hlen) > bytes.size()) throw CheckpointError("checkpoint: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint: malformed header: ") + e.what());
  }
  try {
    Checkpoint ck;
    ck.model = ScanGan::create(model_config_from_json(header.at("model")), 0);
    if (header.contains("train")) ck.train_config = train_config_from_json(header.at("train"));
    ck.epoch = header.at("epoch").get<int>();
    const std::size_t payload = 16 + hlen;
    const std::size_t floats = header.at("payload_floats").get<std::size_t>();
    if (payload + 4 * floats != bytes.size()) throw CheckpointError("checkpoint: payload size mismatch");
    detail::read_store(ck.model.gen_params, header.at("generator"), bytes, payload, floats);
    detail::read_store(ck.model.disc_params, header.at("discriminator"), bytes, payload, floats);
    ck.model.gen_params.set_steps(header.at("adam_steps").at("generator").get<std::int64_t>());
    ck.model.disc_params.set_steps(header.at("adam_steps").at("discriminator").get<std::int64_t>());
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint: malformed header: ") + e.what());
  }
}

inline void save_checkpoint(const std::string& path, const ScanGan& m, const TrainConfig* train = nullptr,
                            int epoch = 0) {
  const std::string bytes = checkpoint_to_bytes(m, train, epoch);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw CheckpointError("checkpoint: cannot open '" + tmp + "' for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw CheckpointError("checkpoint: write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw CheckpointError("checkpoint: cannot rename to '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("checkpoint: cannot open '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return checkpoint_from_bytes(bytes);
}

/// Rounds every parameter and moment to float32, matching what a save/load
/// round trip preserves.
inline void round_to_storage_precision(ScanGan& m) {
  for (auto* store : {&m.gen_params, &m.disc_params})
    for (auto& p : store->params())
      for (auto* vec : {&p.value, &p.m, &p.v})
        for (double& v : *vec) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace scankit
