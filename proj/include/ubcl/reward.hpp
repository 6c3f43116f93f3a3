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

#ifndef UBCL_REWARD_HPP_
#define UBCL_REWARD_HPP_

#include <cmath>
#include <string>

#include "ubcl/arena.hpp"
#include "ubcl/behavior.hpp"
#include "ubcl/errors.hpp"

namespace ubcl {

// Which reward drives training: behavior conditioning, or score only.
enum class RewardMode { kUbcl, kWinOnly };

inline const char* mode_name(RewardMode m) {
  return m == RewardMode::kUbcl ? "ubcl" : "winonly";
}

struct RewardParams {
  double lambda = 1.0;
  friend bool operator==(const RewardParams&, const RewardParams&) = default;
};

inline std::vector<std::string> validate(const RewardParams& p) {
  if (p.lambda > 0 && std::isfinite(p.lambda)) return {};
  return {"reward.lambda must be > 0"};
}

// Normalized reduction of the distance to the target over one step:
//   lambda * (|b_prev - t| - |b_curr - t|) / |t|
// Summed over an episode starting from b = 0 this telescopes to at most lambda.
inline double ubcl_reward(const BehaviorVector& b_prev,
                          const BehaviorVector& b_curr,
                          const TargetVector& target,
                          const RewardParams& params) {
  const double magnitude = norm(target.values);
  if (!(magnitude > 0.0) || !std::isfinite(magnitude)) {
    throw DomainError("ubcl_reward: target vector has zero magnitude");
  }
  return params.lambda *
         (behavior_distance(b_prev, target) - behavior_distance(b_curr, target)) /
         magnitude;
}

// Baseline reward: the agent's score gained this step, over s_max.
inline double winonly_reward(const StepEvents& events, int agent_id,
                             const EnvConfig& config) {
  return events.agents[agent_id].score_delta(config) / config.s_max;
}

}  // namespace ubcl

#endif  // UBCL_REWARD_HPP_
