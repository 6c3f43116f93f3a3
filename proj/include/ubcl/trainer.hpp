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

#ifndef UBCL_TRAINER_HPP_
#define UBCL_TRAINER_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "ubcl/adam.hpp"
#include "ubcl/arena.hpp"
#include "ubcl/behavior.hpp"
#include "ubcl/checkpoint.hpp"
#include "ubcl/network.hpp"
#include "ubcl/observation.hpp"
#include "ubcl/ppo.hpp"
#include "ubcl/reward.hpp"
#include "ubcl/rng.hpp"
#include "ubcl/session.hpp"

namespace ubcl {

struct TrainOptions {
  EnvConfig env = desk_config();
  PPOHyperparams hyper;
  RewardParams reward;
  NetworkSpec network;
  RewardMode mode = RewardMode::kUbcl;
  long total_steps = 0;  // agent transitions (four per environment step)
  int n_envs = 16;
  std::uint64_t seed = 0;
  // Rollout workers. Results do not depend on this value.
  int threads = 1;
  long checkpoint_interval = 0;  // 0: initial and final only
};

inline std::vector<std::string> validate(const TrainOptions& o) {
  std::vector<std::string> v = validate(o.env);
  for (auto& s : validate(o.hyper)) v.push_back(std::move(s));
  for (auto& s : validate(o.reward)) v.push_back(std::move(s));
  for (auto& s : validate(o.network)) v.push_back(std::move(s));
  if (o.total_steps < 0) v.push_back("total_steps must be >= 0");
  if (o.n_envs < 1) v.push_back("n_envs must be >= 1");
  if (o.threads < 1) v.push_back("threads must be >= 1");
  if (o.checkpoint_interval < 0) v.push_back("checkpoint_interval must be >= 0");
  if (o.network.in_channels != kGridChannels || o.network.in_height != o.env.grid_height ||
      o.network.in_width != o.env.grid_width || o.network.vector_size != kVectorInputs) {
    v.push_back("network input shape must be (" + std::to_string(kGridChannels) + ", " +
                std::to_string(o.env.grid_height) + ", " + std::to_string(o.env.grid_width) +
                ") grid + " + std::to_string(kVectorInputs) + " vector inputs");
  }
  return v;
}

// Network input shape matching an environment.
inline NetworkSpec network_for(const EnvConfig& env, NetworkSpec spec = {}) {
  spec.in_channels = kGridChannels;
  spec.in_height = env.grid_height;
  spec.in_width = env.grid_width;
  spec.vector_size = kVectorInputs;
  return spec;
}

// One record per PPO update.
struct CurveRow {
  long step = 0;
  int episodes = 0;  // agent-episodes finished since the previous row
  double mean_return = std::nan("");
  double mean_behavior_error = std::nan("");
  double mean_score = std::nan("");
  UpdateStats stats;
};

inline std::string curve_csv_header() {
  return "step,episodes,mean_return,mean_behavior_error,mean_score,policy_loss,value_loss,"
         "entropy,approx_kl,clip_fraction,grad_norm,learning_rate";
}

inline std::string curve_csv_row(const CurveRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%ld,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g",
                r.step, r.episodes, r.mean_return, r.mean_behavior_error, r.mean_score,
                r.stats.policy_loss, r.stats.value_loss, r.stats.entropy, r.stats.approx_kl,
                r.stats.clip_fraction, r.stats.grad_norm, r.stats.learning_rate);
  return buf;
}

struct TrainCallbacks {
  std::function<void(const CurveRow&)> on_curve;
  std::function<void(const Checkpoint&)> on_checkpoint;
  const std::atomic<bool>* stop = nullptr;  // checked between updates
};

struct TrainingResult {
  std::vector<Checkpoint> checkpoints;
  std::vector<CurveRow> curve;
  bool interrupted = false;
};

namespace detail {

struct EpisodeStat {
  double ret = 0.0;
  double error = 0.0;
  double score = 0.0;
};

// One environment instance with its own generators, so rollouts are
// identical whichever worker runs them.
struct EnvSlot {
  Session session;
  Rng policy_rng;
  Rng target_rng;
  std::uint64_t episode_seed_base = 0;
  std::uint64_t episodes = 0;
  std::array<double, kNumPlayers> returns{};
  std::vector<EpisodeStat> finished;
  std::array<ObservationBundle, kNumPlayers> obs;
  ActorCritic<float>::Input input;
  ActorCritic<float>::Cache cache;
  ActorCritic<float>::Output output;

  void start_episode(const EnvConfig& env) {
    std::array<TargetVector, kNumPlayers> targets;
    for (auto& t : targets) t = sample_target(target_rng);
    session.begin(env, derive_seed(episode_seed_base, episodes), targets);
    ++episodes;
    returns = {};
  }

  void observe(RewardMode mode, const ActorCritic<float>& net) {
    if (input.vector.cols() != kNumPlayers) input = net.make_input(kNumPlayers);
    for (int i = 0; i < kNumPlayers; ++i) {
      if (mode == RewardMode::kUbcl) {
        encode_observation_into(session.state, i, session.behavior[i], session.targets[i], obs[i]);
      } else {
        encode_observation_into(session.state, i, BehaviorVector{}, TargetVector{}, obs[i]);
      }
      fill_input<float>(obs[i], input, i);
    }
    net.forward(input, cache, output);
  }
};

inline void collect(EnvSlot& slot, int env_index, const TrainOptions& o,
                    const ActorCritic<float>& net, RolloutBuffer& buf) {
  for (int t = 0; t < buf.horizon; ++t) {
    slot.observe(o.mode, net);
    JointAction actions{};
    std::array<std::size_t, kNumPlayers> idx{};
    for (int i = 0; i < kNumPlayers; ++i) {
      idx[i] = buf.index(env_index * kNumPlayers + i, t);
      const float* logits = slot.output.logits.col(i).data();
      const double value = slot.output.values(0, i);
      buf.store_observation(idx[i], slot.obs[i]);
      ActResult r;
      if (slot.session.state.players[i].alive) {
        r = sample_action(logits, value, slot.policy_rng, false);
      } else {
        r = sample_action(logits, value, slot.policy_rng, true);
        r.action = Action::kWait;
        r.log_prob = r.log_probs[static_cast<int>(Action::kWait)];
        buf.forced[idx[i]] = 1;
      }
      actions[i] = r.action;
      buf.actions[idx[i]] = static_cast<int>(r.action);
      buf.log_probs[idx[i]] = r.log_prob;
      buf.values[idx[i]] = r.value;
    }
    const auto previous = slot.session.behavior;
    const StepEvents events = slot.session.advance(actions);
    const bool done = slot.session.done();
    for (int i = 0; i < kNumPlayers; ++i) {
      const double reward =
          o.mode == RewardMode::kUbcl
              ? ubcl_reward(previous[i], slot.session.behavior[i], slot.session.targets[i], o.reward)
              : winonly_reward(events, i, o.env);
      buf.rewards[idx[i]] = reward;
      buf.dones[idx[i]] = done ? 1 : 0;
      slot.returns[i] += reward;
    }
    if (done) {
      for (int i = 0; i < kNumPlayers; ++i) {
        slot.finished.push_back(
            {slot.returns[i],
             normalized_error(slot.session.behavior[i], slot.session.targets[i]),
             static_cast<double>(slot.session.state.players[i].score_book.total())});
      }
      slot.start_episode(o.env);
    }
  }
  slot.observe(o.mode, net);
  for (int i = 0; i < kNumPlayers; ++i) {
    buf.bootstrap[env_index * kNumPlayers + i] = slot.output.values(0, i);
  }
}

}  // namespace detail

// Shared-policy PPO training. Every agent of every environment samples its
// own target each episode, is rewarded per step by the UBCL reward (or the
// win-only score reward), and all transitions are pooled into one buffer
// per update.
inline TrainingResult train(const TrainOptions& o, const TrainCallbacks& cb = {}) {
  if (auto v = validate(o); !v.empty()) throw ConfigError(std::move(v));
  TrainingResult result;

  ActorCritic<float> net(o.network);
  Rng init_rng(derive_seed(o.seed, 0));
  net.initialize(init_rng);
  Adam<float> opt(net.parameter_count());
  Rng shuffle_rng(derive_seed(o.seed, 1));

  auto emit_checkpoint = [&](long step) {
    result.checkpoints.push_back(Checkpoint::from(net, o.hyper, o.mode, step));
    if (cb.on_checkpoint) cb.on_checkpoint(result.checkpoints.back());
  };
  emit_checkpoint(0);
  if (o.total_steps == 0) return result;

  const int streams = o.n_envs * kNumPlayers;
  const int horizon = (o.hyper.buffer_size + streams - 1) / streams;
  RolloutBuffer buf(streams, horizon, kGridChannels * o.env.grid_height * o.env.grid_width,
                    kVectorInputs);

  std::vector<detail::EnvSlot> envs(o.n_envs);
  for (int e = 0; e < o.n_envs; ++e) {
    auto& slot = envs[e];
    slot.policy_rng = Rng(derive_seed(o.seed, 100 + 3 * static_cast<std::uint64_t>(e)));
    slot.target_rng = Rng(derive_seed(o.seed, 101 + 3 * static_cast<std::uint64_t>(e)));
    slot.episode_seed_base = derive_seed(o.seed, 102 + 3 * static_cast<std::uint64_t>(e));
    slot.start_episode(o.env);
  }

  long steps_done = 0;
  long next_checkpoint = o.checkpoint_interval > 0 ? o.checkpoint_interval : -1;
  while (steps_done < o.total_steps) {
    const int workers = std::min(o.threads, o.n_envs);
    if (workers <= 1) {
      for (int e = 0; e < o.n_envs; ++e) detail::collect(envs[e], e, o, net, buf);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (int e = w; e < o.n_envs; e += workers) detail::collect(envs[e], e, o, net, buf);
        });
      }
      for (auto& t : pool) t.join();
    }

    const double progress = static_cast<double>(steps_done) / static_cast<double>(o.total_steps);
    steps_done += static_cast<long>(buf.size());
    const double lr = scheduled_learning_rate(o.hyper, progress);

    CurveRow row;
    row.step = steps_done;
    row.stats = ppo_update(net, opt, buf, o.hyper, lr, shuffle_rng);
    double ret = 0.0, err = 0.0, score = 0.0;
    for (auto& slot : envs) {
      for (const auto& s : slot.finished) {
        ret += s.ret;
        err += s.error;
        score += s.score;
        ++row.episodes;
      }
      slot.finished.clear();
    }
    if (row.episodes > 0) {
      row.mean_return = ret / row.episodes;
      row.mean_behavior_error = err / row.episodes;
      row.mean_score = score / row.episodes;
    }
    result.curve.push_back(row);
    if (cb.on_curve) cb.on_curve(row);

    const bool stopping = cb.stop && cb.stop->load();
    if (steps_done >= o.total_steps || stopping) {
      emit_checkpoint(steps_done);
      result.interrupted = stopping && steps_done < o.total_steps;
      break;
    }
    if (next_checkpoint > 0 && steps_done >= next_checkpoint) {
      emit_checkpoint(steps_done);
      while (next_checkpoint <= steps_done) next_checkpoint += o.checkpoint_interval;
    }
  }
  return result;
}

inline TrainingResult train_ubcl(TrainOptions o, const TrainCallbacks& cb = {}) {
  o.mode = RewardMode::kUbcl;
  return train(o, cb);
}

// Same loop with the score reward; behavior inputs are fed as zeros.
inline TrainingResult train_winonly(TrainOptions o, const TrainCallbacks& cb = {}) {
  o.mode = RewardMode::kWinOnly;
  return train(o, cb);
}

}  // namespace ubcl

#endif  // UBCL_TRAINER_HPP_
