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

#ifndef UBCL_OBSERVATION_HPP_
#define UBCL_OBSERVATION_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "ubcl/arena.hpp"
#include "ubcl/behavior.hpp"

namespace ubcl {

// Grid channel order.
enum class Channel : int {
  kSelf = 0,
  kTeammate,
  kEnemies,
  kWalls,
  kCoins,
  kDiamonds,
  kNpcs,
  kAttackEffects,
};
inline constexpr int kGridChannels = 8;

// Vector layout: team id, remaining time, then for self, teammate and the
// two enemies (ascending id) health, alive, orientation one-hot (4) and
// normalized x/y; last the attacker's cooldown readiness.
inline constexpr int kPerPlayerFeatures = 8;
inline constexpr int kStateFeatures = 2 + 4 * kPerPlayerFeatures + 1;
// state_vec followed by current and target behavior.
inline constexpr int kVectorInputs = kStateFeatures + 2 * kBehaviorDims;

struct ObservationBundle {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> grid;  // channels x height x width, values 0/1
  std::array<float, kStateFeatures> state_vec{};
  BehaviorVector b_current;
  TargetVector b_target;

  std::uint8_t at(Channel c, int x, int y) const {
    return grid[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  int channel_sum(Channel c) const {
    const auto begin = grid.begin() + static_cast<std::ptrdiff_t>(
                                          static_cast<int>(c) * height * width);
    return static_cast<int>(std::count(begin, begin + height * width, 1));
  }
};

// Agents `agent` sees, in vector order: self, teammate, enemies.
inline std::array<int, kNumPlayers> perspective_order(int agent) {
  const int enemy0 = agent < 2 ? 2 : 0;
  return {agent, teammate_of(agent), enemy0, enemy0 + 1};
}

inline void encode_observation_into(const GameState& s, int agent,
                                    const BehaviorVector& b_curr,
                                    const TargetVector& b_target,
                                    ObservationBundle& obs) {
  const int h = s.height();
  const int w = s.width();
  obs.height = h;
  obs.width = w;
  obs.grid.assign(static_cast<std::size_t>(kGridChannels) * h * w, 0);
  auto set = [&](Channel c, Cell cell) {
    obs.grid[(static_cast<std::size_t>(c) * h + cell.y) * w + cell.x] = 1;
  };

  const auto order = perspective_order(agent);
  const PlayerState& self = s.players[agent];
  const PlayerState& mate = s.players[order[1]];
  if (self.alive) set(Channel::kSelf, self.position);
  if (mate.alive) set(Channel::kTeammate, mate.position);
  for (int k = 2; k < kNumPlayers; ++k) {
    const PlayerState& e = s.players[order[k]];
    if (e.alive) set(Channel::kEnemies, e.position);
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Cell c{x, y};
      if (s.is_wall(c)) set(Channel::kWalls, c);
      const Item it = s.item_at(c);
      if (it == Item::kCoin) set(Channel::kCoins, c);
      if (it == Item::kDiamond) set(Channel::kDiamonds, c);
    }
  }
  for (const Cell& n : s.npcs) set(Channel::kNpcs, n);
  for (const Cell& b : s.blast_cells) set(Channel::kAttackEffects, b);

  auto& v = obs.state_vec;
  v.fill(0.0f);
  v[0] = self.team == Team::kBlue ? 0.0f : 1.0f;
  v[1] = static_cast<float>(s.config.episode_length - s.timestep) /
         static_cast<float>(s.config.episode_length);
  for (int k = 0; k < kNumPlayers; ++k) {
    const PlayerState& p = s.players[order[k]];
    float* f = v.data() + 2 + k * kPerPlayerFeatures;
    f[0] = static_cast<float>(p.health) / s.config.player_health;
    f[1] = p.alive ? 1.0f : 0.0f;
    f[2 + static_cast<int>(p.orientation)] = 1.0f;
    f[6] = static_cast<float>(p.position.x) / static_cast<float>(w - 1);
    f[7] = static_cast<float>(p.position.y) / static_cast<float>(h - 1);
  }
  v[kStateFeatures - 1] =
      s.config.attack_cooldown == 0
          ? 1.0f
          : 1.0f - static_cast<float>(self.attack_timer) /
                       static_cast<float>(s.config.attack_cooldown);
  obs.b_current = b_curr;
  obs.b_target = b_target;
}

inline ObservationBundle encode_observation(const GameState& s, int agent,
                                            const BehaviorVector& b_curr,
                                            const TargetVector& b_target) {
  ObservationBundle obs;
  encode_observation_into(s, agent, b_curr, b_target, obs);
  return obs;
}

// Flat vector input for the network: state_vec, b_current, b_target.
template <typename Out>
void write_vector_input(const ObservationBundle& obs, Out* out) {
  for (int i = 0; i < kStateFeatures; ++i) out[i] = static_cast<Out>(obs.state_vec[i]);
  for (int i = 0; i < kBehaviorDims; ++i) {
    out[kStateFeatures + i] = static_cast<Out>(obs.b_current[i]);
    out[kStateFeatures + kBehaviorDims + i] = static_cast<Out>(obs.b_target[i]);
  }
}

}  // namespace ubcl

#endif  // UBCL_OBSERVATION_HPP_
