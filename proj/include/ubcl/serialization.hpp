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

#ifndef UBCL_SERIALIZATION_HPP_
#define UBCL_SERIALIZATION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "ubcl/arena.hpp"
#include "ubcl/behavior.hpp"
#include "ubcl/errors.hpp"
#include "ubcl/network.hpp"
#include "ubcl/ppo.hpp"
#include "ubcl/reward.hpp"

namespace ubcl {

using Json = nlohmann::ordered_json;

// Reads required fields out of a JSON object, recording every missing or
// mistyped field under its dotted path instead of stopping at the first.
class JsonReader {
 public:
  JsonReader(const Json& j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (!j_.is_object()) errors_.push_back(path_ + " must be an object");
  }

  template <typename T>
  void field(const char* key, T& out) {
    const Json* v = find(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw std::invalid_argument("expected boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw std::invalid_argument("expected integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw std::invalid_argument("expected number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw std::invalid_argument("expected string");
      }
      out = v->get<T>();
    } catch (const std::exception& e) {
      errors_.push_back(qualified(key) + ": " + e.what());
    }
  }

  // Present and an object; nullptr (with an error recorded) otherwise.
  const Json* object(const char* key) {
    const Json* v = find(key);
    if (v && !v->is_object()) {
      errors_.push_back(qualified(key) + " must be an object");
      return nullptr;
    }
    return v;
  }

  const Json* array(const char* key) {
    const Json* v = find(key);
    if (v && !v->is_array()) {
      errors_.push_back(qualified(key) + " must be an array");
      return nullptr;
    }
    return v;
  }

  std::string qualified(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  std::vector<std::string>& errors() { return errors_; }

 private:
  const Json* find(const char* key) {
    if (!j_.is_object()) return nullptr;
    const auto it = j_.find(key);
    if (it == j_.end()) {
      errors_.push_back("missing required field '" + qualified(key) + "'");
      return nullptr;
    }
    return &*it;
  }

  const Json& j_;
  std::string path_;
  std::vector<std::string>& errors_;
};

// --- EnvConfig --------------------------------------------------------------

inline Json to_json(const EnvConfig& c) {
  Json walls = Json::array();
  for (const Cell& w : c.walls) walls.push_back({w.x, w.y});
  return Json{{"grid_width", c.grid_width},
              {"grid_height", c.grid_height},
              {"episode_length", c.episode_length},
              {"coin_value", c.coin_value},
              {"diamond_value", c.diamond_value},
              {"kill_value", c.kill_value},
              {"coin_spawn_period", c.coin_spawn_period},
              {"diamond_spawn_period", c.diamond_spawn_period},
              {"max_coins", c.max_coins},
              {"max_diamonds", c.max_diamonds},
              {"initial_coins", c.initial_coins},
              {"initial_diamonds", c.initial_diamonds},
              {"npc_count", c.npc_count},
              {"diamond_npc_radius", c.diamond_npc_radius},
              {"attack_range", c.attack_range},
              {"attack_cooldown", c.attack_cooldown},
              {"player_health", c.player_health},
              {"attack_damage", c.attack_damage},
              {"respawn_delay", c.respawn_delay},
              {"s_max", c.s_max},
              {"walls", walls}};
}

inline void read(JsonReader& r, EnvConfig& c) {
  r.field("grid_width", c.grid_width);
  r.field("grid_height", c.grid_height);
  r.field("episode_length", c.episode_length);
  r.field("coin_value", c.coin_value);
  r.field("diamond_value", c.diamond_value);
  r.field("kill_value", c.kill_value);
  r.field("coin_spawn_period", c.coin_spawn_period);
  r.field("diamond_spawn_period", c.diamond_spawn_period);
  r.field("max_coins", c.max_coins);
  r.field("max_diamonds", c.max_diamonds);
  r.field("initial_coins", c.initial_coins);
  r.field("initial_diamonds", c.initial_diamonds);
  r.field("npc_count", c.npc_count);
  r.field("diamond_npc_radius", c.diamond_npc_radius);
  r.field("attack_range", c.attack_range);
  r.field("attack_cooldown", c.attack_cooldown);
  r.field("player_health", c.player_health);
  r.field("attack_damage", c.attack_damage);
  r.field("respawn_delay", c.respawn_delay);
  r.field("s_max", c.s_max);
  if (const Json* walls = r.array("walls")) {
    c.walls.clear();
    for (std::size_t i = 0; i < walls->size(); ++i) {
      const Json& w = (*walls)[i];
      if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer() ||
          !w[1].is_number_integer()) {
        r.errors().push_back(r.qualified("walls") + "[" + std::to_string(i) +
                             "] must be an [x, y] integer pair");
        continue;
      }
      c.walls.push_back({w[0].get<int>(), w[1].get<int>()});
    }
  }
}

// --- PPOHyperparams -------------------------------------------------------

inline Json to_json(const PPOHyperparams& h) {
  return Json{{"batch_size", h.batch_size},
              {"buffer_size", h.buffer_size},
              {"learning_rate", h.learning_rate},
              {"learning_rate_schedule", h.lr_schedule == LrSchedule::kLinear ? "linear" : "constant"},
              {"beta", h.beta},
              {"beta_schedule", "constant"},
              {"epsilon", h.epsilon},
              {"lambd", h.lambd},
              {"gamma", h.gamma},
              {"epochs", h.epochs},
              {"value_coef", h.value_coef},
              {"max_grad_norm", h.max_grad_norm},
              {"normalize_advantages", h.normalize_advantages}};
}

inline void read(JsonReader& r, PPOHyperparams& h) {
  r.field("batch_size", h.batch_size);
  r.field("buffer_size", h.buffer_size);
  r.field("learning_rate", h.learning_rate);
  std::string lr_schedule, beta_schedule;
  r.field("learning_rate_schedule", lr_schedule);
  if (lr_schedule == "linear") {
    h.lr_schedule = LrSchedule::kLinear;
  } else if (lr_schedule == "constant") {
    h.lr_schedule = LrSchedule::kConstant;
  } else if (!lr_schedule.empty()) {
    r.errors().push_back(r.qualified("learning_rate_schedule") + " must be 'linear' or 'constant'");
  }
  r.field("beta", h.beta);
  r.field("beta_schedule", beta_schedule);
  if (!beta_schedule.empty() && beta_schedule != "constant") {
    r.errors().push_back(r.qualified("beta_schedule") + " must be 'constant'");
  }
  r.field("epsilon", h.epsilon);
  r.field("lambd", h.lambd);
  r.field("gamma", h.gamma);
  r.field("epochs", h.epochs);
  r.field("value_coef", h.value_coef);
  r.field("max_grad_norm", h.max_grad_norm);
  r.field("normalize_advantages", h.normalize_advantages);
}

// --- NetworkSpec ----------------------------------------------------------

inline Json to_json(const NetworkSpec& s) {
  Json conv = Json::array();
  for (const auto& c : s.conv_layers) {
    conv.push_back({{"filters", c.filters}, {"kernel", c.kernel}, {"stride", c.stride}});
  }
  return Json{{"in_channels", s.in_channels},
              {"in_height", s.in_height},
              {"in_width", s.in_width},
              {"vector_size", s.vector_size},
              {"conv_layers", conv},
              {"hidden_widths", s.hidden_widths},
              {"hidden_activation", "glu"},
              {"action_count", s.action_count},
              {"leaky_slope", s.leaky_slope}};
}

inline void read(JsonReader& r, NetworkSpec& s) {
  r.field("in_channels", s.in_channels);
  r.field("in_height", s.in_height);
  r.field("in_width", s.in_width);
  r.field("vector_size", s.vector_size);
  if (const Json* conv = r.array("conv_layers")) {
    s.conv_layers.clear();
    for (std::size_t i = 0; i < conv->size(); ++i) {
      JsonReader cr((*conv)[i], r.qualified("conv_layers") + "[" + std::to_string(i) + "]",
                    r.errors());
      ConvSpec c;
      cr.field("filters", c.filters);
      cr.field("kernel", c.kernel);
      cr.field("stride", c.stride);
      s.conv_layers.push_back(c);
    }
  }
  r.field("hidden_widths", s.hidden_widths);
  std::string activation;
  r.field("hidden_activation", activation);
  if (!activation.empty() && activation != "glu") {
    r.errors().push_back(r.qualified("hidden_activation") + " must be 'glu'");
  }
  r.field("action_count", s.action_count);
  r.field("leaky_slope", s.leaky_slope);
}

// --- RewardParams / RewardMode -------------------------------------------

inline Json to_json(const RewardParams& p) { return Json{{"lambda", p.lambda}}; }

inline void read(JsonReader& r, RewardParams& p) { r.field("lambda", p.lambda); }

inline RewardMode parse_mode(const std::string& s) {
  if (s == "ubcl") return RewardMode::kUbcl;
  if (s == "winonly") return RewardMode::kWinOnly;
  throw ConfigError("mode must be 'ubcl' or 'winonly', got '" + s + "'");
}

// --- Vectors ----------------------------------------------------------------

inline Json to_json(const Vec6& v) { return Json(std::vector<double>(v.begin(), v.end())); }

inline Vec6 vec6_from_json(const Json& j) {
  if (!j.is_array() || j.size() != kBehaviorDims) {
    throw ConfigError("expected an array of 6 numbers");
  }
  Vec6 v{};
  for (int i = 0; i < kBehaviorDims; ++i) v[i] = j[i].get<double>();
  return v;
}

// Parses "b1,b2,b3,b4,b5,b6". Errors carry the character offset.
inline Vec6 parse_vec6(const std::string& text) {
  Vec6 v{};
  std::size_t pos = 0;
  for (int i = 0; i < kBehaviorDims; ++i) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    if (pos >= text.size()) {
      throw ParseError("expected 6 comma-separated numbers, found " + std::to_string(i), pos);
    }
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    const double x = std::strtod(begin, &end);
    if (end == begin) throw ParseError("expected a number", pos);
    pos += static_cast<std::size_t>(end - begin);
    while (pos < text.size() && text[pos] == ' ') ++pos;
    if (i + 1 < kBehaviorDims) {
      if (pos >= text.size() || text[pos] != ',') {
        throw ParseError("expected ',' after component " + std::to_string(i + 1), pos);
      }
      ++pos;
    } else if (pos != text.size()) {
      throw ParseError("unexpected trailing characters", pos);
    }
    if (!(x >= 0.0 && x <= 1.0)) {
      throw ParseError("component " + std::to_string(i + 1) + " outside [0, 1]",
                       static_cast<std::size_t>(begin - text.c_str()));
    }
    v[i] = x;
  }
  return v;
}

inline std::uint64_t json_hash(const Json& j) {
  const std::string s = j.dump();
  Fnv1a h;
  h.bytes(s.data(), s.size());
  return h.digest();
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace ubcl

#endif  // UBCL_SERIALIZATION_HPP_
