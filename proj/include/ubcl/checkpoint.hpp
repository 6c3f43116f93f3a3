// Copyright 2026 The UBCL Authors. All rights reserved.
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

#ifndef UBCL_CHECKPOINT_HPP_
#define UBCL_CHECKPOINT_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ubcl/errors.hpp"
#include "ubcl/network.hpp"
#include "ubcl/ppo.hpp"
#include "ubcl/reward.hpp"
#include "ubcl/serialization.hpp"

namespace ubcl {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

// Binary layout:
//   "UBCLCKPT" | u32 version | u64 n | n bytes JSON metadata |
//   u64 count | count x f32 parameters | u64 FNV-1a of all preceding bytes
inline constexpr char kCheckpointMagic[8] = {'U', 'B', 'C', 'L', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  NetworkSpec network;
  PPOHyperparams hyper;
  RewardMode mode = RewardMode::kUbcl;
  long step = 0;
  std::vector<float> parameters;

  ActorCritic<float> make_network() const {
    ActorCritic<float> net(network);
    if (net.parameter_count() != parameters.size()) {
      throw IncompatibleCheckpoint("checkpoint holds " + std::to_string(parameters.size()) +
                                   " parameters, network shape needs " +
                                   std::to_string(net.parameter_count()));
    }
    std::copy(parameters.begin(), parameters.end(), net.parameters().begin());
    return net;
  }

  static Checkpoint from(const ActorCritic<float>& net, const PPOHyperparams& hyper,
                         RewardMode mode, long step) {
    Checkpoint c;
    c.network = net.spec();
    c.hyper = hyper;
    c.mode = mode;
    c.step = step;
    c.parameters.assign(net.parameters().begin(), net.parameters().end());
    return c;
  }
};

inline Json checkpoint_metadata(const Checkpoint& c) {
  return Json{{"format", "ubcl-checkpoint"},
              {"version", kCheckpointVersion},
              {"mode", mode_name(c.mode)},
              {"step", c.step},
              {"scalar", "f32"},
              {"parameter_count", c.parameters.size()},
              {"network", to_json(c.network)},
              {"hyperparameters", to_json(c.hyper)}};
}

inline std::string serialize_checkpoint(const Checkpoint& c) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  auto put = [&out](const auto& v) {
    out.append(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  put(kCheckpointVersion);
  const std::string meta = checkpoint_metadata(c).dump();
  put(static_cast<std::uint64_t>(meta.size()));
  out += meta;
  put(static_cast<std::uint64_t>(c.parameters.size()));
  out.append(reinterpret_cast<const char*>(c.parameters.data()),
             c.parameters.size() * sizeof(float));
  Fnv1a h;
  h.bytes(out.data(), out.size());
  put(h.digest());
  return out;
}

// Parses a whole checkpoint image; nothing is returned unless every check
// passes.
inline Checkpoint deserialize_checkpoint(const std::string& data) {
  std::size_t pos = 0;
  auto take = [&](void* dst, std::size_t n, const char* what) {
    if (data.size() - pos < n) {
      throw IoError(std::string("checkpoint truncated while reading ") + what);
    }
    std::memcpy(dst, data.data() + pos, n);
    pos += n;
  };
  char magic[8];
  take(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw IoError("not a checkpoint file (bad magic)");
  }
  std::uint32_t version = 0;
  take(&version, sizeof(version), "version");
  if (version != kCheckpointVersion) {
    throw IncompatibleCheckpoint("checkpoint format version " + std::to_string(version) +
                                 " is not supported (expected " +
                                 std::to_string(kCheckpointVersion) + ")");
  }
  std::uint64_t meta_len = 0;
  take(&meta_len, sizeof(meta_len), "metadata length");
  if (meta_len > data.size() - pos) throw IoError("checkpoint truncated while reading metadata");
  const std::string meta(data.data() + pos, meta_len);
  pos += meta_len;
  std::uint64_t count = 0;
  take(&count, sizeof(count), "parameter count");
  if (count > (data.size() - pos) / sizeof(float)) {
    throw IoError("checkpoint truncated while reading parameters");
  }
  std::vector<float> params(count);
  take(params.data(), count * sizeof(float), "parameters");
  const std::size_t body = pos;
  std::uint64_t checksum = 0;
  take(&checksum, sizeof(checksum), "checksum");
  if (pos != data.size()) throw IoError("checkpoint has trailing bytes");
  Fnv1a h;
  h.bytes(data.data(), body);
  if (h.digest() != checksum) throw IoError("checkpoint checksum mismatch (corrupt file)");

  Json j;
  try {
    j = Json::parse(meta);
  } catch (const std::exception& e) {
    throw IoError(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }
  Checkpoint c;
  std::vector<std::string> errors;
  JsonReader r(j, "", errors);
  std::string mode;
  r.field("mode", mode);
  r.field("step", c.step);
  if (const Json* net = r.object("network")) {
    JsonReader nr(*net, "network", errors);
    read(nr, c.network);
  }
  if (const Json* hyper = r.object("hyperparameters")) {
    JsonReader hr(*hyper, "hyperparameters", errors);
    read(hr, c.hyper);
  }
  if (!errors.empty()) throw IncompatibleCheckpoint("checkpoint metadata: " + errors.front());
  c.mode = parse_mode(mode);
  c.parameters = std::move(params);
  ActorCritic<float> shape(c.network);
  if (shape.parameter_count() != c.parameters.size()) {
    throw IncompatibleCheckpoint("checkpoint parameter count does not match its network spec");
  }
  return c;
}

// Writes through a temporary file and renames, so readers never see a
// partial checkpoint.
inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const std::string bytes = serialize_checkpoint(c);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_checkpoint(ss.str());
}

// As above, and rejects checkpoints whose network shape differs from `expected`.
inline Checkpoint load_checkpoint(const std::filesystem::path& path, const NetworkSpec& expected) {
  Checkpoint c = load_checkpoint(path);
  if (!(c.network == expected)) {
    throw IncompatibleCheckpoint("checkpoint " + path.string() +
                                 " was written for a different network spec: " +
                                 to_json(c.network).dump());
  }
  return c;
}

}  // namespace ubcl

#endif  // UBCL_CHECKPOINT_HPP_
