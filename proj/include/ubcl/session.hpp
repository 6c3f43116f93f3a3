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

#ifndef UBCL_SESSION_HPP_
#define UBCL_SESSION_HPP_

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "ubcl/arena.hpp"
#include "ubcl/behavior.hpp"
#include "ubcl/network.hpp"
#include "ubcl/observation.hpp"
#include "ubcl/ppo.hpp"
#include "ubcl/replay.hpp"
#include "ubcl/reward.hpp"

namespace ubcl {

// One arena episode plus the four agents' behavior bookkeeping.
struct Session {
  GameState state;
  std::array<BehaviorAccumulator, kNumPlayers> accumulators;
  std::array<BehaviorVector, kNumPlayers> behavior{};  // all zero at start
  std::array<TargetVector, kNumPlayers> targets{};

  void begin(const EnvConfig& config, std::uint64_t seed,
             const std::array<TargetVector, kNumPlayers>& episode_targets) {
    state = reset(config, seed);
    for (int i = 0; i < kNumPlayers; ++i) accumulators[i] = make_accumulator(state, i);
    behavior = {};
    targets = episode_targets;
  }

  // Steps the arena and refreshes every agent's behavior vector.
  StepEvents advance(const JointAction& actions) {
    StepEvents events = step(state, actions);
    for (int i = 0; i < kNumPlayers; ++i) {
      update_accumulator(accumulators[i], state.players[i], state.players[teammate_of(i)]);
      behavior[i] = current_behavior(accumulators[i], state.geometry, state.config);
    }
    return events;
  }

  bool done() const { return state.terminal(); }
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string tag() const = 0;
  virtual Action act(const GameState& s, int agent, const BehaviorVector& b,
                     const TargetVector& t, Rng& rng) = 0;
};

// Acts with a trained network. Unconditioned (win-only) policies see zeros in
// place of the behavior inputs.
class PolicyController : public Controller {
 public:
  PolicyController(std::shared_ptr<const ActorCritic<float>> net, RewardMode mode,
                   bool greedy = false)
      : net_(std::move(net)), mode_(mode), greedy_(greedy) {}

  std::string tag() const override { return mode_name(mode_); }

  Action act(const GameState& s, int agent, const BehaviorVector& b, const TargetVector& t,
             Rng& rng) override {
    if (mode_ == RewardMode::kUbcl) {
      encode_observation_into(s, agent, b, t, obs_);
    } else {
      encode_observation_into(s, agent, BehaviorVector{}, TargetVector{}, obs_);
    }
    return ubcl::act(*net_, obs_, rng, greedy_).action;
  }

 private:
  std::shared_ptr<const ActorCritic<float>> net_;
  RewardMode mode_;
  bool greedy_;
  ObservationBundle obs_;
};

class RandomController : public Controller {
 public:
  std::string tag() const override { return "random"; }
  Action act(const GameState&, int, const BehaviorVector&, const TargetVector&,
             Rng& rng) override {
    return static_cast<Action>(rng.below(kNumActions));
  }
};

class ScriptedController : public Controller {
 public:
  using Fn = std::function<Action(const GameState&, int)>;
  ScriptedController(std::string tag, Fn fn) : tag_(std::move(tag)), fn_(std::move(fn)) {}
  std::string tag() const override { return tag_; }
  Action act(const GameState& s, int agent, const BehaviorVector&, const TargetVector&,
             Rng&) override {
    return fn_(s, agent);
  }

 private:
  std::string tag_;
  Fn fn_;
};

struct EpisodeOutcome {
  std::array<BehaviorVector, kNumPlayers> behavior{};
  std::array<TargetVector, kNumPlayers> targets{};
  std::array<double, kNumPlayers> ubcl_return{};  // sum of per-step rewards
  std::array<ScoreBook, kNumPlayers> scores{};
  std::uint64_t final_hash = 0;
};

using Lineup = std::array<Controller*, kNumPlayers>;

// Plays one full episode. Dead agents wait without consulting their
// controller. Per-step UBCL rewards are accumulated for every agent.
inline EpisodeOutcome run_episode(const EnvConfig& config, std::uint64_t seed,
                                  const Lineup& lineup,
                                  const std::array<TargetVector, kNumPlayers>& targets,
                                  Rng& policy_rng, const RewardParams& reward = {},
                                  ReplayWriter* replay = nullptr) {
  Session session;
  session.begin(config, seed, targets);
  if (replay) {
    std::array<std::string, kNumPlayers> tags;
    for (int i = 0; i < kNumPlayers; ++i) tags[i] = lineup[i]->tag();
    replay->header(session.state, seed, tags, targets);
  }
  EpisodeOutcome out;
  out.targets = targets;
  while (!session.done()) {
    JointAction actions{};
    for (int i = 0; i < kNumPlayers; ++i) {
      actions[i] = session.state.players[i].alive
                       ? lineup[i]->act(session.state, i, session.behavior[i], targets[i],
                                        policy_rng)
                       : Action::kWait;
    }
    const auto previous = session.behavior;
    const StepEvents events = session.advance(actions);
    for (int i = 0; i < kNumPlayers; ++i) {
      out.ubcl_return[i] += ubcl_reward(previous[i], session.behavior[i], targets[i], reward);
    }
    if (replay) replay->step(session.state, actions, events);
  }
  if (replay) replay->final(session.behavior);
  out.behavior = session.behavior;
  for (int i = 0; i < kNumPlayers; ++i) out.scores[i] = session.state.players[i].score_book;
  out.final_hash = state_hash(session.state);
  return out;
}

}  // namespace ubcl

#endif  // UBCL_SESSION_HPP_
