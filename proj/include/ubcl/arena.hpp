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

#ifndef UBCL_ARENA_HPP_
#define UBCL_ARENA_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ubcl/errors.hpp"
#include "ubcl/rng.hpp"

namespace ubcl {

inline constexpr int kNumPlayers = 4;
inline constexpr int kNumActions = 6;

struct Cell {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum class Direction : std::uint8_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

inline Cell offset(Cell c, Direction d, int n = 1) {
  switch (d) {
    case Direction::kUp: return {c.x, c.y - n};
    case Direction::kDown: return {c.x, c.y + n};
    case Direction::kLeft: return {c.x - n, c.y};
    case Direction::kRight: return {c.x + n, c.y};
  }
  return c;
}

enum class Action : std::uint8_t {
  kMoveLeft = 0,
  kMoveRight = 1,
  kMoveUp = 2,
  kMoveDown = 3,
  kAttack = 4,
  kWait = 5,
};

inline const char* action_name(Action a) {
  static constexpr const char* kNames[] = {"move_left", "move_right", "move_up",
                                           "move_down", "attack",    "wait"};
  return kNames[static_cast<int>(a)];
}

using JointAction = std::array<Action, kNumPlayers>;

enum class Team : std::uint8_t { kBlue = 0, kRed = 1 };

inline constexpr int teammate_of(int agent) { return agent ^ 1; }
inline constexpr Team team_of(int agent) {
  return agent < 2 ? Team::kBlue : Team::kRed;
}

struct EnvConfig {
  int grid_width = 16;
  int grid_height = 16;
  int episode_length = 256;
  int coin_value = 1;
  int diamond_value = 5;
  int kill_value = 5;
  int coin_spawn_period = 4;
  int diamond_spawn_period = 16;
  int max_coins = 10;
  int max_diamonds = 2;
  int initial_coins = 5;
  int initial_diamonds = 1;
  int npc_count = 2;
  // Diamonds spawn within this Chebyshev distance of some NPC.
  int diamond_npc_radius = 3;
  int attack_range = 3;
  int attack_cooldown = 3;
  int player_health = 1;
  int attack_damage = 1;
  int respawn_delay = 8;
  double s_max = 35.0;
  std::vector<Cell> walls;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

// max_coins*coin_value + max_diamonds*diamond_value + 3*kill_value: the
// score on the map in one full spawn cycle plus three eliminations.
inline double score_ceiling_estimate(const EnvConfig& c) {
  return static_cast<double>(c.max_coins) * c.coin_value +
         static_cast<double>(c.max_diamonds) * c.diamond_value +
         3.0 * c.kill_value;
}

// The 16x16 arena with four short interior wall segments.
inline EnvConfig desk_config() {
  EnvConfig c;
  for (int x = 3; x <= 6; ++x) c.walls.push_back({x, 4});
  for (int x = 9; x <= 12; ++x) c.walls.push_back({x, 11});
  for (int y = 9; y <= 12; ++y) c.walls.push_back({4, y});
  for (int y = 3; y <= 6; ++y) c.walls.push_back({11, y});
  c.s_max = score_ceiling_estimate(c);
  return c;
}

inline std::vector<std::string> validate(const EnvConfig& c) {
  std::vector<std::string> v;
  auto need = [&v](bool ok, const std::string& msg) {
    if (!ok) v.push_back(msg);
  };
  need(c.grid_width >= 8, "env.grid_width must be >= 8");
  need(c.grid_height >= 8, "env.grid_height must be >= 8");
  need(c.episode_length >= 1, "env.episode_length must be >= 1");
  need(c.coin_value > 0, "env.coin_value must be > 0");
  need(c.coin_value < c.diamond_value,
       "env.coin_value must be < env.diamond_value");
  need(c.kill_value >= 0, "env.kill_value must be >= 0");
  need(c.coin_spawn_period >= 1, "env.coin_spawn_period must be >= 1");
  need(c.diamond_spawn_period >= 1, "env.diamond_spawn_period must be >= 1");
  need(c.max_coins >= 0, "env.max_coins must be >= 0");
  need(c.max_diamonds >= 0, "env.max_diamonds must be >= 0");
  need(c.initial_coins >= 0 && c.initial_coins <= c.max_coins,
       "env.initial_coins must be in [0, env.max_coins]");
  need(c.initial_diamonds >= 0 && c.initial_diamonds <= c.max_diamonds,
       "env.initial_diamonds must be in [0, env.max_diamonds]");
  need(c.npc_count >= 0, "env.npc_count must be >= 0");
  need(c.diamond_npc_radius >= 0, "env.diamond_npc_radius must be >= 0");
  need(c.attack_range >= 1, "env.attack_range must be >= 1");
  need(c.attack_cooldown >= 0, "env.attack_cooldown must be >= 0");
  need(c.player_health >= 1, "env.player_health must be >= 1");
  need(c.attack_damage >= 1, "env.attack_damage must be >= 1");
  need(c.respawn_delay >= 0, "env.respawn_delay must be >= 0");
  need(c.s_max > 0 && std::isfinite(c.s_max), "env.s_max must be > 0");

  if (c.grid_width >= 1 && c.grid_height >= 1) {
    std::vector<std::uint8_t> seen(
        static_cast<std::size_t>(c.grid_width) * c.grid_height, 0);
    int wall_cells = 0;
    for (const Cell& w : c.walls) {
      if (w.x < 0 || w.y < 0 || w.x >= c.grid_width || w.y >= c.grid_height) {
        v.push_back("env.walls contains out-of-grid cell (" +
                    std::to_string(w.x) + "," + std::to_string(w.y) + ")");
        continue;
      }
      auto& s = seen[static_cast<std::size_t>(w.y) * c.grid_width + w.x];
      if (s) {
        v.push_back("env.walls contains duplicate cell (" +
                    std::to_string(w.x) + "," + std::to_string(w.y) + ")");
      }
      s = 1;
      ++wall_cells;
    }
    const long free_cells =
        static_cast<long>(c.grid_width) * c.grid_height - wall_cells;
    const long entities = static_cast<long>(kNumPlayers) + c.npc_count +
                          c.max_coins + c.max_diamonds;
    need(entities <= free_cells,
         "players + npc_count + max_coins + max_diamonds (" +
             std::to_string(entities) + ") exceeds free cells (" +
             std::to_string(free_cells) + ")");
  }
  return v;
}

inline void validate_or_throw(const EnvConfig& c) {
  auto v = validate(c);
  if (!v.empty()) throw ConfigError(std::move(v));
}

struct MapGeometry {
  double d_max = 0.0;           // grid diagonal between cell centres
  int n_total_visitable = 0;    // non-wall cells
  friend bool operator==(const MapGeometry&, const MapGeometry&) = default;
};

inline MapGeometry compute_geometry(const EnvConfig& c) {
  MapGeometry g;
  const double w = c.grid_width - 1;
  const double h = c.grid_height - 1;
  g.d_max = std::sqrt(w * w + h * h);
  std::vector<Cell> walls = c.walls;
  std::sort(walls.begin(), walls.end());
  walls.erase(std::unique(walls.begin(), walls.end()), walls.end());
  g.n_total_visitable =
      c.grid_width * c.grid_height - static_cast<int>(walls.size());
  return g;
}

struct ScoreBook {
  int s_c = 0;
  int s_d = 0;
  int s_k = 0;
  int total() const { return s_c + s_d + s_k; }
  friend bool operator==(const ScoreBook&, const ScoreBook&) = default;
};

struct PlayerState {
  int id = 0;
  Team team = Team::kBlue;
  Cell position;
  Direction orientation = Direction::kUp;
  int health = 0;
  bool alive = true;
  int respawn_timer = 0;
  int attack_timer = 0;
  ScoreBook score_book;
  friend bool operator==(const PlayerState&, const PlayerState&) = default;
};

enum class Item : std::uint8_t { kNone = 0, kCoin = 1, kDiamond = 2 };

// Per-agent outcome of one step. Collected values are in points.
struct AgentEvents {
  int coins_collected = 0;
  int diamonds_collected = 0;
  int kills = 0;
  bool died = false;
  int items_destroyed = 0;
  bool attack_suppressed = false;  // attack requested during cooldown

  int score_delta(const EnvConfig& c) const {
    return coins_collected + diamonds_collected + kills * c.kill_value;
  }
  friend bool operator==(const AgentEvents&, const AgentEvents&) = default;
};

struct StepEvents {
  std::array<AgentEvents, kNumPlayers> agents{};
  friend bool operator==(const StepEvents&, const StepEvents&) = default;
};

struct GameState {
  EnvConfig config;
  MapGeometry geometry;
  std::vector<std::uint8_t> wall_mask;
  std::array<PlayerState, kNumPlayers> players{};
  std::vector<Cell> npcs;
  std::vector<Item> items;  // one entry per cell
  int coin_count = 0;
  int diamond_count = 0;
  std::vector<Cell> blast_cells;  // explosion cells of the latest step
  int timestep = 0;
  Rng rng;

  int width() const { return config.grid_width; }
  int height() const { return config.grid_height; }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y) * config.grid_width + c.x;
  }
  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < config.grid_width &&
           c.y < config.grid_height;
  }
  bool is_wall(Cell c) const { return wall_mask[index(c)] != 0; }
  Item item_at(Cell c) const { return items[index(c)]; }
  bool has_npc(Cell c) const {
    return std::find(npcs.begin(), npcs.end(), c) != npcs.end();
  }
  // Index of the live player on `c`, or -1.
  int player_at(Cell c) const {
    for (const auto& p : players) {
      if (p.alive && p.position == c) return p.id;
    }
    return -1;
  }
  bool terminal() const { return timestep >= config.episode_length; }

  friend bool operator==(const GameState&, const GameState&) = default;
};

namespace detail {

inline bool free_for_spawn(const GameState& s, Cell c) {
  return !s.is_wall(c) && s.player_at(c) < 0 && !s.has_npc(c) &&
         s.item_at(c) == Item::kNone;
}

inline bool near_npc(const GameState& s, Cell c) {
  const int r = s.config.diamond_npc_radius;
  for (const Cell& n : s.npcs) {
    if (std::abs(n.x - c.x) <= r && std::abs(n.y - c.y) <= r) return true;
  }
  return false;
}

// Uniformly chosen cell satisfying `pred`, scanned in row-major order.
template <typename Pred>
bool pick_cell(GameState& s, Pred pred, Cell* out) {
  std::vector<Cell> eligible;
  for (int y = 0; y < s.height(); ++y) {
    for (int x = 0; x < s.width(); ++x) {
      if (pred(Cell{x, y})) eligible.push_back({x, y});
    }
  }
  if (eligible.empty()) return false;
  *out = eligible[s.rng.below(eligible.size())];
  return true;
}

inline bool place_item(GameState& s, Item kind) {
  Cell c;
  const bool ok =
      kind == Item::kCoin
          ? pick_cell(s, [&](Cell q) { return free_for_spawn(s, q); }, &c)
          : pick_cell(
                s,
                [&](Cell q) { return free_for_spawn(s, q) && near_npc(s, q); },
                &c);
  if (!ok) return false;
  s.items[s.index(c)] = kind;
  (kind == Item::kCoin ? s.coin_count : s.diamond_count) += 1;
  return true;
}

inline void kill_player(GameState& s, PlayerState& p, AgentEvents& ev) {
  p.alive = false;
  p.health = 0;
  p.respawn_timer = s.config.respawn_delay;
  ev.died = true;
}

inline void npc_contact(GameState& s, StepEvents& events) {
  for (auto& p : s.players) {
    if (p.alive && s.has_npc(p.position)) kill_player(s, p, events.agents[p.id]);
  }
}

inline Direction direction_of(Action a) {
  switch (a) {
    case Action::kMoveLeft: return Direction::kLeft;
    case Action::kMoveRight: return Direction::kRight;
    case Action::kMoveUp: return Direction::kUp;
    default: return Direction::kDown;
  }
}

inline bool is_move(Action a) { return static_cast<int>(a) <= 3; }

}  // namespace detail

inline GameState reset(const EnvConfig& config, std::uint64_t seed) {
  validate_or_throw(config);
  GameState s;
  s.config = config;
  s.geometry = compute_geometry(config);
  s.rng = Rng(seed);
  const auto cells =
      static_cast<std::size_t>(config.grid_width) * config.grid_height;
  s.wall_mask.assign(cells, 0);
  for (const Cell& w : config.walls) s.wall_mask[s.index(w)] = 1;
  s.items.assign(cells, Item::kNone);
  for (int i = 0; i < kNumPlayers; ++i) {
    PlayerState& p = s.players[i];
    p.id = i;
    p.team = team_of(i);
    p.alive = false;  // not solid until placed
  }
  for (auto& p : s.players) {
    Cell c;
    if (!detail::pick_cell(s, [&](Cell q) { return detail::free_for_spawn(s, q); }, &c)) {
      throw ConfigError("no free cell for player " + std::to_string(p.id));
    }
    p.position = c;
    p.orientation = static_cast<Direction>(s.rng.below(4));
    p.health = config.player_health;
    p.alive = true;
  }
  for (int i = 0; i < config.npc_count; ++i) {
    Cell c;
    if (!detail::pick_cell(s, [&](Cell q) { return detail::free_for_spawn(s, q); }, &c)) {
      throw ConfigError("no free cell for npc " + std::to_string(i));
    }
    s.npcs.push_back(c);
  }
  for (int i = 0; i < config.initial_coins; ++i) detail::place_item(s, Item::kCoin);
  for (int i = 0; i < config.initial_diamonds; ++i) {
    detail::place_item(s, Item::kDiamond);
  }
  return s;
}

// Casts the attacker's explosion along its orientation. The first wall,
// player, NPC or collectible within attack_range absorbs it. Teammates and
// NPCs take no damage; collectibles are destroyed.
inline void resolve_attack(GameState& s, int attacker_id, StepEvents& events) {
  PlayerState& a = s.players[attacker_id];
  AgentEvents& ev = events.agents[attacker_id];
  if (!a.alive) return;
  if (a.attack_timer > 0) {
    ev.attack_suppressed = true;
    return;
  }
  a.attack_timer = s.config.attack_cooldown;
  for (int r = 1; r <= s.config.attack_range; ++r) {
    const Cell c = offset(a.position, a.orientation, r);
    if (!s.in_bounds(c) || s.is_wall(c)) return;
    s.blast_cells.push_back(c);
    if (const int hit = s.player_at(c); hit >= 0) {
      PlayerState& victim = s.players[hit];
      if (victim.team == a.team) return;
      victim.health = std::max(0, victim.health - s.config.attack_damage);
      if (victim.health == 0) {
        detail::kill_player(s, victim, events.agents[hit]);
        ev.kills += 1;
        a.score_book.s_k += s.config.kill_value;
      }
      return;
    }
    if (s.has_npc(c)) return;
    if (Item& it = s.items[s.index(c)]; it != Item::kNone) {
      (it == Item::kCoin ? s.coin_count : s.diamond_count) -= 1;
      it = Item::kNone;
      ev.items_destroyed += 1;
      return;
    }
  }
}

// Each NPC, in index order, steps to a uniformly chosen legal neighbour or
// stays when boxed in. Players sharing a cell with an NPC afterwards die.
inline void advance_npcs(GameState& s, StepEvents& events) {
  static constexpr Direction kDirs[] = {Direction::kUp, Direction::kDown,
                                        Direction::kLeft, Direction::kRight};
  for (std::size_t i = 0; i < s.npcs.size(); ++i) {
    Cell options[4];
    int n = 0;
    for (Direction d : kDirs) {
      const Cell c = offset(s.npcs[i], d);
      if (s.in_bounds(c) && !s.is_wall(c) && !s.has_npc(c)) options[n++] = c;
    }
    if (n > 0) s.npcs[i] = options[s.rng.below(static_cast<std::uint64_t>(n))];
  }
  detail::npc_contact(s, events);
}

// Respawns players whose timer ran out, then places coins and diamonds on
// their spawn periods when below the caps.
inline void spawn_items(GameState& s) {
  for (auto& p : s.players) {
    if (p.alive || p.respawn_timer > 0) continue;
    Cell c;
    if (detail::pick_cell(s, [&](Cell q) { return detail::free_for_spawn(s, q); }, &c)) {
      p.position = c;
      p.health = s.config.player_health;
      p.alive = true;
      p.attack_timer = 0;
    }
  }
  if (s.timestep % s.config.coin_spawn_period == 0 &&
      s.coin_count < s.config.max_coins) {
    detail::place_item(s, Item::kCoin);
  }
  if (s.timestep % s.config.diamond_spawn_period == 0 &&
      s.diamond_count < s.config.max_diamonds && !s.npcs.empty()) {
    detail::place_item(s, Item::kDiamond);
  }
}

// Advances the episode by one step. Phases: attacks on pre-move positions,
// movement in agent-index order, pickup, NPC movement and contact, spawns,
// clock. Dead players' actions are ignored.
inline StepEvents step(GameState& s, const JointAction& actions) {
  if (s.terminal()) {
    throw LifecycleError("step() called on a finished episode (timestep " +
                         std::to_string(s.timestep) + ")");
  }
  StepEvents events;
  s.blast_cells.clear();

  for (int i = 0; i < kNumPlayers; ++i) {
    if (actions[i] == Action::kAttack && s.players[i].alive) {
      resolve_attack(s, i, events);
    }
  }

  for (int i = 0; i < kNumPlayers; ++i) {
    PlayerState& p = s.players[i];
    if (!p.alive || !detail::is_move(actions[i])) continue;
    p.orientation = detail::direction_of(actions[i]);
    const Cell target = offset(p.position, p.orientation);
    if (!s.in_bounds(target) || s.is_wall(target) || s.player_at(target) >= 0) {
      continue;
    }
    p.position = target;
  }

  for (auto& p : s.players) {
    if (!p.alive) continue;
    Item& it = s.items[s.index(p.position)];
    if (it == Item::kCoin) {
      p.score_book.s_c += s.config.coin_value;
      events.agents[p.id].coins_collected += s.config.coin_value;
      s.coin_count -= 1;
    } else if (it == Item::kDiamond) {
      p.score_book.s_d += s.config.diamond_value;
      events.agents[p.id].diamonds_collected += s.config.diamond_value;
      s.diamond_count -= 1;
    }
    it = Item::kNone;
  }

  detail::npc_contact(s, events);  // players who walked into an NPC
  advance_npcs(s, events);
  spawn_items(s);

  s.timestep += 1;
  for (auto& p : s.players) {
    if (p.alive) {
      p.attack_timer = std::max(0, p.attack_timer - 1);
    } else {
      p.respawn_timer = std::max(0, p.respawn_timer - 1);
    }
  }
  return events;
}

// Hash over everything observable in the state. The generator state is left
// out; it is covered implicitly by the entity positions it produces.
inline std::uint64_t state_hash(const GameState& s) {
  Fnv1a h;
  h.value(s.timestep);
  for (const auto& p : s.players) {
    h.value(p.position.x);
    h.value(p.position.y);
    h.value(static_cast<std::uint8_t>(p.orientation));
    h.value(p.health);
    h.value(static_cast<std::uint8_t>(p.alive));
    h.value(p.respawn_timer);
    h.value(p.attack_timer);
    h.value(p.score_book.s_c);
    h.value(p.score_book.s_d);
    h.value(p.score_book.s_k);
  }
  for (const Cell& n : s.npcs) {
    h.value(n.x);
    h.value(n.y);
  }
  for (std::size_t i = 0; i < s.items.size(); ++i) {
    if (s.items[i] != Item::kNone) {
      h.value(static_cast<std::uint32_t>(i));
      h.value(static_cast<std::uint8_t>(s.items[i]));
    }
  }
  for (const Cell& c : s.blast_cells) {
    h.value(c.x);
    h.value(c.y);
  }
  return h.digest();
}

}  // namespace ubcl

#endif  // UBCL_ARENA_HPP_
