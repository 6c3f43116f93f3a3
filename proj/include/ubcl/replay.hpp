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

#ifndef UBCL_REPLAY_HPP_
#define UBCL_REPLAY_HPP_

#include <array>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ubcl/arena.hpp"
#include "ubcl/behavior.hpp"
#include "ubcl/errors.hpp"
#include "ubcl/serialization.hpp"

namespace ubcl {

// Line-delimited JSON replay log.
//
//   {"kind":"header", "format":"ubcl-replay", "version":1, "seed":..,
//    "config":{..}, "config_hash":"..", "policies":[4 tags],
//    "targets":[4 x 6], "initial":{"players":[[x,y,alive] x4], "hash":".."}}
//   {"kind":"step", "t":1, "actions":[4], "events":[4 x {...}],
//    "players":[[x,y,alive] x4], "hash":".."}            (one per step)
//   {"kind":"final", "behavior":[4 x 6]}
//
// Actions plus (config, seed) reproduce every state, so the hashes can be
// re-derived by replaying through the simulator.
inline constexpr int kReplayVersion = 1;

class ReplayRejected : public IoError {
 public:
  using IoError::IoError;
};

namespace detail {

inline Json players_json(const GameState& s) {
  Json p = Json::array();
  for (const auto& pl : s.players) p.push_back({pl.position.x, pl.position.y, pl.alive ? 1 : 0});
  return p;
}

inline Json events_json(const AgentEvents& e) {
  return Json{{"coins", e.coins_collected},     {"diamonds", e.diamonds_collected},
              {"kills", e.kills},               {"died", e.died},
              {"destroyed", e.items_destroyed}, {"attack_suppressed", e.attack_suppressed}};
}

}  // namespace detail

class ReplayWriter {
 public:
  explicit ReplayWriter(std::ostream& out) : out_(out) {}

  void header(const GameState& initial, std::uint64_t seed,
              const std::array<std::string, kNumPlayers>& policies,
              const std::array<TargetVector, kNumPlayers>& targets) {
    const Json config = to_json(initial.config);
    Json t = Json::array();
    for (const auto& v : targets) t.push_back(to_json(v.values));
    Json h{{"kind", "header"},
           {"format", "ubcl-replay"},
           {"version", kReplayVersion},
           {"seed", seed},
           {"config", config},
           {"config_hash", hex64(json_hash(config))},
           {"policies", policies},
           {"targets", t},
           {"initial",
            {{"players", detail::players_json(initial)}, {"hash", hex64(state_hash(initial))}}}};
    out_ << h.dump() << '\n';
  }

  void step(const GameState& after, const JointAction& actions, const StepEvents& events) {
    Json a = Json::array();
    for (Action act : actions) a.push_back(static_cast<int>(act));
    Json e = Json::array();
    for (const auto& ev : events.agents) e.push_back(detail::events_json(ev));
    Json rec{{"kind", "step"},
             {"t", after.timestep},
             {"actions", a},
             {"events", e},
             {"players", detail::players_json(after)},
             {"hash", hex64(state_hash(after))}};
    out_ << rec.dump() << '\n';
  }

  void final(const std::array<BehaviorVector, kNumPlayers>& behavior) {
    Json b = Json::array();
    for (const auto& v : behavior) b.push_back(to_json(v.values));
    out_ << Json{{"kind", "final"}, {"behavior", b}}.dump() << '\n';
  }

 private:
  std::ostream& out_;
};

struct ReplayLog {
  Json header;
  std::vector<Json> steps;
  std::optional<Json> final;
};

inline ReplayLog read_replay(std::istream& in) {
  ReplayLog log;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const std::exception& e) {
      throw IoError("replay line " + std::to_string(line_no) + " is not JSON: " + e.what());
    }
    const std::string kind = j.value("kind", "");
    if (kind == "header") {
      if (!log.header.is_null()) throw IoError("replay has two header lines");
      log.header = std::move(j);
    } else if (kind == "step") {
      log.steps.push_back(std::move(j));
    } else if (kind == "final") {
      log.final = std::move(j);
    } else {
      throw IoError("replay line " + std::to_string(line_no) + " has unknown kind '" + kind + "'");
    }
  }
  if (log.header.is_null()) throw IoError("replay has no header line");
  if (log.header.value("format", "") != "ubcl-replay" ||
      log.header.value("version", 0) != kReplayVersion) {
    throw ReplayRejected("replay header has unsupported format or version");
  }
  return log;
}

struct ReplayCheck {
  int steps_checked = 0;
  bool ok = true;
  int first_mismatch = -1;  // timestep of the first differing hash
};

inline EnvConfig replay_config(const ReplayLog& log) {
  const Json& config = log.header.at("config");
  if (hex64(json_hash(config)) != log.header.value("config_hash", "")) {
    throw ReplayRejected("replay config hash does not match its config; refusing to replay");
  }
  EnvConfig c;
  std::vector<std::string> errors;
  JsonReader r(config, "config", errors);
  read(r, c);
  if (!errors.empty()) throw ReplayRejected("replay config unreadable: " + errors.front());
  return c;
}

// Re-simulates the logged actions and compares every state hash.
inline ReplayCheck verify_replay(const ReplayLog& log) {
  const EnvConfig config = replay_config(log);
  GameState s = reset(config, log.header.at("seed").get<std::uint64_t>());
  ReplayCheck check;
  if (hex64(state_hash(s)) != log.header.at("initial").at("hash").get<std::string>()) {
    check.ok = false;
    check.first_mismatch = 0;
    return check;
  }
  for (const Json& rec : log.steps) {
    JointAction actions{};
    const Json& a = rec.at("actions");
    if (!a.is_array() || a.size() != kNumPlayers) throw IoError("replay step has malformed actions");
    for (int i = 0; i < kNumPlayers; ++i) {
      const int v = a[i].get<int>();
      if (v < 0 || v >= kNumActions) throw IoError("replay step has out-of-range action");
      actions[i] = static_cast<Action>(v);
    }
    step(s, actions);
    ++check.steps_checked;
    if (hex64(state_hash(s)) != rec.at("hash").get<std::string>()) {
      check.ok = false;
      check.first_mismatch = s.timestep;
      return check;
    }
  }
  return check;
}

inline ReplayCheck verify_replay(std::istream& in) { return verify_replay(read_replay(in)); }

}  // namespace ubcl

#endif  // UBCL_REPLAY_HPP_
