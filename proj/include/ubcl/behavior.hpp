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

#ifndef UBCL_BEHAVIOR_HPP_
#define UBCL_BEHAVIOR_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "ubcl/arena.hpp"
#include "ubcl/rng.hpp"

namespace ubcl {

inline constexpr int kBehaviorDims = 6;
using Vec6 = std::array<double, kBehaviorDims>;

inline constexpr std::array<const char*, kBehaviorDims> kBehaviorNames = {
    "cs_ratio", "ds_ratio", "ks_ratio", "dominance", "t_distance", "mobility"};

// Achieved play-style summary: coin/diamond/kill shares of the score,
// dominance, mean teammate distance and mobility, each in [0, 1].
struct BehaviorVector {
  Vec6 values{};
  double& operator[](int i) { return values[i]; }
  double operator[](int i) const { return values[i]; }
  friend bool operator==(const BehaviorVector&, const BehaviorVector&) = default;
};

// Episode-fixed objective with the same layout as BehaviorVector.
struct TargetVector {
  Vec6 values{};
  double& operator[](int i) { return values[i]; }
  double operator[](int i) const { return values[i]; }
  friend bool operator==(const TargetVector&, const TargetVector&) = default;
};

inline double euclidean(const Vec6& a, const Vec6& b) {
  double s = 0.0;
  for (int i = 0; i < kBehaviorDims; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double norm(const Vec6& a) { return euclidean(a, Vec6{}); }

inline double behavior_distance(const BehaviorVector& b, const TargetVector& t) {
  return euclidean(b.values, t.values);
}

// Distance scaled by the largest possible error, sqrt(6).
inline double normalized_error(const BehaviorVector& b, const TargetVector& t) {
  return behavior_distance(b, t) / std::sqrt(static_cast<double>(kBehaviorDims));
}

// Running per-agent statistics behind the behavior vector.
struct BehaviorAccumulator {
  ScoreBook score_book;
  int grid_width = 0;
  std::vector<std::uint8_t> visited;  // cell mask
  int visited_count = 0;
  double teammate_distance_sum = 0.0;
  // Distance repeated while either teammate awaits respawn.
  double last_teammate_distance = 0.0;
  int steps_observed = 0;
  friend bool operator==(const BehaviorAccumulator&,
                         const BehaviorAccumulator&) = default;
};

inline double cell_distance(Cell a, Cell b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Fresh accumulator for `agent` at episode start.
inline BehaviorAccumulator make_accumulator(const GameState& s, int agent) {
  BehaviorAccumulator acc;
  acc.grid_width = s.width();
  acc.visited.assign(static_cast<std::size_t>(s.width()) * s.height(), 0);
  acc.last_teammate_distance =
      cell_distance(s.players[agent].position,
                    s.players[teammate_of(agent)].position);
  return acc;
}

// Call once per environment step per agent, after the step resolved.
inline void update_accumulator(BehaviorAccumulator& acc,
                               const PlayerState& player,
                               const PlayerState& teammate) {
  acc.score_book = player.score_book;
  if (player.alive) {
    auto& v = acc.visited[static_cast<std::size_t>(player.position.y) *
                              acc.grid_width +
                          player.position.x];
    if (!v) {
      v = 1;
      ++acc.visited_count;
    }
  }
  if (player.alive && teammate.alive) {
    acc.last_teammate_distance =
        cell_distance(player.position, teammate.position);
  }
  acc.teammate_distance_sum += acc.last_teammate_distance;
  ++acc.steps_observed;
}

// The six metrics. Before any score the three ratios are 0; before the first
// update the whole vector is 0.
inline BehaviorVector current_behavior(const BehaviorAccumulator& acc,
                                       const MapGeometry& geometry,
                                       const EnvConfig& config) {
  BehaviorVector b;
  if (acc.steps_observed == 0) return b;
  const ScoreBook& sb = acc.score_book;
  const double total = static_cast<double>(sb.total());
  if (total > 0) {
    b[0] = sb.s_c / total;
    b[1] = sb.s_d / total;
    b[2] = sb.s_k / total;
  }
  b[3] = std::clamp(total / config.s_max, 0.0, 1.0);
  const double mean_distance = acc.teammate_distance_sum / acc.steps_observed;
  b[4] = std::clamp(mean_distance / geometry.d_max, 0.0, 1.0);
  b[5] = static_cast<double>(acc.visited_count) / geometry.n_total_visitable;
  return b;
}

// Draws a target from the fixed sampling space: C/S ~ U[0,1],
// D/S ~ U[0, 1 - C/S], K/S = remainder, dominance ~ U[0,1],
// T-distance and mobility ~ U[0.15, 1].
//
// The two sampled ratios are rounded down to multiples of 2^-52 so every
// partial sum of the three ratios is exact and they add to exactly 1.
inline TargetVector sample_target(Rng& rng) {
  constexpr double kGrid = 0x1.0p52;
  TargetVector t;
  t[0] = std::floor(rng.uniform() * kGrid) / kGrid;
  t[1] = std::floor(rng.uniform() * (1.0 - t[0]) * kGrid) / kGrid;
  t[2] = 1.0 - t[0] - t[1];
  t[3] = rng.uniform();
  t[4] = 0.15 + 0.85 * rng.uniform();
  t[5] = 0.15 + 0.85 * rng.uniform();
  return t;
}

// Membership in the sampling space, with `tol` on the ratio sum.
inline bool in_target_space(const TargetVector& t, double tol = 0.0) {
  for (double v : t.values) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return std::abs(t[0] + t[1] + t[2] - 1.0) <= tol && t[4] >= 0.15 &&
         t[5] >= 0.15;
}

// CSV helpers. Behavior vectors are exported with 6 significant digits.
inline std::string format_sig6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

inline double round_sig6(double x) {
  return std::strtod(format_sig6(x).c_str(), nullptr);
}

inline std::string csv_row(const Vec6& v) {
  std::string out;
  for (int i = 0; i < kBehaviorDims; ++i) {
    if (i) out += ',';
    out += format_sig6(v[i]);
  }
  return out;
}

inline std::string csv_header(const std::string& prefix = "") {
  std::string out;
  for (int i = 0; i < kBehaviorDims; ++i) {
    if (i) out += ',';
    out += prefix + kBehaviorNames[i];
  }
  return out;
}

}  // namespace ubcl

#endif  // UBCL_BEHAVIOR_HPP_
