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

#ifndef UBCL_CONFIG_HPP_
#define UBCL_CONFIG_HPP_

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ubcl/errors.hpp"
#include "ubcl/serialization.hpp"
#include "ubcl/trainer.hpp"

namespace ubcl {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutputRootEnv = "UBCL_OUTPUT_ROOT";

// Everything needed to reproduce a training run.
struct RunConfig {
  TrainOptions train;
  std::string output_dir = "runs/desk";
  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    const auto& x = a.train;
    const auto& y = b.train;
    return x.env == y.env && x.hyper == y.hyper && x.reward == y.reward &&
           x.network == y.network && x.mode == y.mode && x.total_steps == y.total_steps &&
           x.n_envs == y.n_envs && x.seed == y.seed && x.threads == y.threads &&
           x.checkpoint_interval == y.checkpoint_interval && a.output_dir == b.output_dir;
  }
};

inline RunConfig default_run_config() {
  RunConfig c;
  c.train.env = desk_config();
  c.train.network = network_for(c.train.env);
  // Tuned for a 2M-transition budget on one core; the PPOHyperparams
  // defaults are the large-scale values.
  c.train.hyper.learning_rate = 1e-3;
  c.train.hyper.buffer_size = 4096;
  c.train.hyper.batch_size = 512;
  c.train.hyper.epochs = 6;
  c.train.reward.lambda = 10.0;
  c.train.total_steps = 2000000;
  c.train.checkpoint_interval = 500000;
  return c;
}

inline Json to_json(const RunConfig& c) {
  const auto& t = c.train;
  return Json{{"mode", mode_name(t.mode)},
              {"seed", t.seed},
              {"total_steps", t.total_steps},
              {"n_envs", t.n_envs},
              {"threads", t.threads},
              {"checkpoint_interval", t.checkpoint_interval},
              {"output_dir", c.output_dir},
              {"env", to_json(t.env)},
              {"ppo", to_json(t.hyper)},
              {"reward", to_json(t.reward)},
              {"network", to_json(t.network)}};
}

// Strict: every field must be present. Throws ConfigError listing all
// missing fields and violated invariants.
inline RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  std::vector<std::string> errors;
  JsonReader r(j, "", errors);
  std::string mode;
  r.field("mode", mode);
  r.field("seed", c.train.seed);
  r.field("total_steps", c.train.total_steps);
  r.field("n_envs", c.train.n_envs);
  r.field("threads", c.train.threads);
  r.field("checkpoint_interval", c.train.checkpoint_interval);
  r.field("output_dir", c.output_dir);
  if (const Json* env = r.object("env")) {
    JsonReader sub(*env, "env", errors);
    read(sub, c.train.env);
  }
  if (const Json* ppo = r.object("ppo")) {
    JsonReader sub(*ppo, "ppo", errors);
    read(sub, c.train.hyper);
  }
  if (const Json* reward = r.object("reward")) {
    JsonReader sub(*reward, "reward", errors);
    read(sub, c.train.reward);
  }
  if (const Json* network = r.object("network")) {
    JsonReader sub(*network, "network", errors);
    read(sub, c.train.network);
  }
  if (!mode.empty()) {
    if (mode == "ubcl" || mode == "winonly") {
      c.train.mode = parse_mode(mode);
    } else {
      errors.push_back("mode must be 'ubcl' or 'winonly'");
    }
  }
  if (errors.empty()) {
    errors = validate(c.train);
    if (c.output_dir.empty()) errors.push_back("output_dir must not be empty");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// "a.b.c=value". The value is parsed as JSON when possible, else taken as a
// string.
inline void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ParseError("override must look like key.path=value", eq == std::string::npos ? 0 : eq);
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const std::exception&) {
    value = text;
  }
  Json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object() || !node->contains(part)) {
      throw ConfigError("override names unknown field '" + key.substr(0, dot) + "'");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = value;
}

inline RunConfig load_run_config(const std::filesystem::path& path,
                                 const std::vector<std::string>& overrides = {}) {
  Json j = read_json_file(path);
  for (const auto& o : overrides) apply_override(j, o);
  return run_config_from_json(j);
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f << text;
    if (!f) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// manifest.json in a run directory: config snapshot, timestamps, artifacts.
struct RunManifest {
  Json config;
  std::string started;
  std::string finished;  // empty while running
  std::string status = "running";
  std::vector<std::string> checkpoints;
  std::string curves;
  std::vector<std::string> replays;

  Json to_json() const {
    return Json{{"tool_version", kToolVersion},
                {"status", status},
                {"started", started},
                {"finished", finished},
                {"config", config},
                {"artifacts",
                 {{"checkpoints", checkpoints}, {"curves", curves}, {"replays", replays}}}};
  }

  void write(const std::filesystem::path& dir) const {
    write_text_atomic(dir / "manifest.json", to_json().dump(2) + "\n");
  }
};

}  // namespace ubcl

#endif  // UBCL_CONFIG_HPP_
