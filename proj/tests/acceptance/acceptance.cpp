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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
//
//   acceptance [--only 1,2,7] [--config configs/desk.json]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "ubcl/ubcl.hpp"

namespace ubcl {
namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// A valid arena drawn at random: size, economy, combat and walls all vary.
EnvConfig random_config(Rng& rng) {
  while (true) {
    EnvConfig c;
    c.grid_width = 8 + static_cast<int>(rng.below(13));
    c.grid_height = 8 + static_cast<int>(rng.below(13));
    c.episode_length = 16 + static_cast<int>(rng.below(300));
    c.coin_value = 1 + static_cast<int>(rng.below(3));
    c.diamond_value = c.coin_value + 1 + static_cast<int>(rng.below(8));
    c.kill_value = static_cast<int>(rng.below(10));
    c.coin_spawn_period = 1 + static_cast<int>(rng.below(8));
    c.diamond_spawn_period = 1 + static_cast<int>(rng.below(32));
    c.max_coins = static_cast<int>(rng.below(16));
    c.max_diamonds = static_cast<int>(rng.below(4));
    c.initial_coins = static_cast<int>(rng.below(c.max_coins + 1));
    c.initial_diamonds = static_cast<int>(rng.below(c.max_diamonds + 1));
    c.npc_count = static_cast<int>(rng.below(5));
    c.diamond_npc_radius = static_cast<int>(rng.below(5));
    c.attack_range = 1 + static_cast<int>(rng.below(4));
    c.attack_cooldown = static_cast<int>(rng.below(5));
    c.player_health = 1 + static_cast<int>(rng.below(3));
    c.attack_damage = 1 + static_cast<int>(rng.below(2));
    c.respawn_delay = static_cast<int>(rng.below(12));
    std::set<Cell> walls;
    const int n_walls = static_cast<int>(rng.below(12));
    for (int i = 0; i < n_walls; ++i) {
      walls.insert({static_cast<int>(rng.below(c.grid_width)),
                    static_cast<int>(rng.below(c.grid_height))});
    }
    c.walls.assign(walls.begin(), walls.end());
    c.s_max = score_ceiling_estimate(c);
    if (validate(c).empty()) return c;
  }
}

std::array<TargetVector, kNumPlayers> random_targets(Rng& rng) {
  std::array<TargetVector, kNumPlayers> t;
  for (auto& x : t) x = sample_target(rng);
  return t;
}

// ---------------------------------------------------------------------------
// 1. Telescoping return

Verdict telescoping() {
  Rng rng(101);
  RandomController random;
  const Lineup lineup{&random, &random, &random, &random};
  double worst = 0.0;
  int bad = 0;
  for (int ep = 0; ep < 200; ++ep) {
    const EnvConfig c = random_config(rng);
    const RewardParams reward{rng.uniform(0.1, 10.0)};
    const auto targets = random_targets(rng);
    Rng policy(rng.next_u64());
    const EpisodeOutcome out = run_episode(c, rng.next_u64(), lineup, targets, policy, reward);
    for (int i = 0; i < kNumPlayers; ++i) {
      const double m = norm(targets[i].values);
      const double want =
          reward.lambda * (m - behavior_distance(out.behavior[i], targets[i])) / m;
      const double dev = std::abs(out.ubcl_return[i] - want) / reward.lambda;
      worst = std::max(worst, dev);
      bad += dev > 1e-6;
    }
  }
  return {bad == 0, fmt("200 episodes x 4 agents, worst |sum r - telescoped| / lambda = %.3g "
                        "(limit 1e-6)", worst)};
}

// ---------------------------------------------------------------------------
// 2. Maximum return

Verdict max_return() {
  Rng rng(202);
  double worst_oracle = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const TargetVector t = sample_target(rng);
    const RewardParams reward{rng.uniform(0.1, 10.0)};
    BehaviorVector prev{};
    double ret = 0.0;
    const int steps = 1 + static_cast<int>(rng.below(40));
    for (int s = 0; s < steps; ++s) {
      BehaviorVector next;
      if (s + 1 == steps) {
        next.values = t.values;
      } else {
        for (int d = 0; d < kBehaviorDims; ++d) next[d] = rng.uniform();
      }
      ret += ubcl_reward(prev, next, t, reward);
      prev = next;
    }
    worst_oracle = std::max(worst_oracle, std::abs(ret - reward.lambda) / reward.lambda);
  }

  const EnvConfig desk = desk_config();
  RandomController random;
  const Lineup lineup{&random, &random, &random, &random};
  double best_fraction = -1e9;
  long over = 0;
  for (int ep = 0; ep < 10000; ++ep) {
    const EnvConfig c = ep % 2 == 0 ? desk : random_config(rng);
    const RewardParams reward{rng.uniform(0.1, 10.0)};
    const auto targets = random_targets(rng);
    Rng policy(rng.next_u64());
    const EpisodeOutcome out = run_episode(c, rng.next_u64(), lineup, targets, policy, reward);
    for (int i = 0; i < kNumPlayers; ++i) {
      over += out.ubcl_return[i] > reward.lambda;
      best_fraction = std::max(best_fraction, out.ubcl_return[i] / reward.lambda);
    }
  }
  return {worst_oracle <= 1e-9 && over == 0,
          fmt("oracle b_T = b*: worst |return - lambda| / lambda = %.3g (limit 1e-9); "
              "10000 random episodes: %ld returns above lambda, best return / lambda = %.4f",
              worst_oracle, over, best_fraction)};
}

// ---------------------------------------------------------------------------
// 3. Target sampler

Verdict sampler() {
  Rng rng(303);
  const int n = 10000;
  std::vector<double> b1;
  int sum_bad = 0, range_bad = 0;
  for (int i = 0; i < n; ++i) {
    const TargetVector t = sample_target(rng);
    sum_bad += (t[0] + t[1] + t[2]) != 1.0;
    range_bad += !(t[4] >= 0.15 && t[4] <= 1.0 && t[5] >= 0.15 && t[5] <= 1.0);
    b1.push_back(t[0]);
  }
  const double d = oracle::ks_uniform(b1);
  const double critical = 1.6276 / std::sqrt(static_cast<double>(n));  // alpha = 0.01
  return {sum_bad == 0 && range_bad == 0 && d < critical,
          fmt("%d targets: ratio sum != 1 in %d, b5/b6 outside [0.15,1] in %d, "
              "KS D = %.5f (critical %.5f)",
              n, sum_bad, range_bad, d, critical)};
}

// ---------------------------------------------------------------------------
// 4. Behavior metrics recomputed from replay logs

Verdict replay_oracle() {
  Rng rng(404);
  RandomController random;
  const Lineup lineup{&random, &random, &random, &random};
  double worst = 0.0;
  for (int ep = 0; ep < 100; ++ep) {
    const EnvConfig c = ep % 2 == 0 ? desk_config() : random_config(rng);
    const auto targets = random_targets(rng);
    std::ostringstream log;
    ReplayWriter writer(log);
    Rng policy(rng.next_u64());
    const EpisodeOutcome out = run_episode(c, rng.next_u64(), lineup, targets, policy, {}, &writer);
    std::istringstream in(log.str());
    std::vector<nlohmann::ordered_json> lines;
    for (std::string line; std::getline(in, line);) {
      lines.push_back(nlohmann::ordered_json::parse(line));
    }
    const auto m = oracle::behavior_from_replay(lines);
    for (int i = 0; i < kNumPlayers; ++i) {
      for (int d = 0; d < kBehaviorDims; ++d) {
        worst = std::max(worst, std::abs(m.behavior[i][d] - out.behavior[i][d]));
      }
    }
  }
  return {worst <= 1e-9,
          fmt("100 episodes x 4 agents x 6 metrics, worst |oracle - engine| = %.3g (limit 1e-9)",
              worst)};
}

// ---------------------------------------------------------------------------
// 5. GAE and loss gradients

Verdict numerics() {
  Rng rng(505);
  double worst_gae = 0.0;
  for (int seq = 0; seq < 1000; ++seq) {
    const int n = 1 + static_cast<int>(rng.below(32));
    std::vector<double> r(n), v(n);
    std::vector<int> done(n);
    std::vector<std::uint8_t> done8(n);
    for (int t = 0; t < n; ++t) {
      r[t] = rng.uniform(-1, 1);
      v[t] = rng.uniform(-1, 1);
      done[t] = rng.uniform() < 0.1;
      done8[t] = static_cast<std::uint8_t>(done[t]);
    }
    const double boot = rng.uniform(-1, 1);
    const double g = rng.uniform(0.8, 1.0), l = rng.uniform(0.0, 1.0);
    const auto got = compute_gae(r, v, done8, boot, g, l);
    const auto want = oracle::gae_bruteforce(r, v, done, boot, g, l);
    for (int t = 0; t < n; ++t) worst_gae = std::max(worst_gae, std::abs(got.advantages[t] - want[t]));
  }

  using NetD = ActorCritic<double>;
  NetworkSpec spec;
  spec.in_channels = 2;
  spec.in_height = 4;
  spec.in_width = 4;
  spec.vector_size = 3;
  spec.conv_layers = {{2, 3, 2}};
  spec.hidden_widths = {4};
  double worst_grad = 0.0;
  std::size_t params = 0;
  for (int trial = 0; trial < 5; ++trial) {
    NetD net(spec);
    params = net.parameter_count();
    for (double& p : net.parameters()) p = rng.uniform(-0.8, 0.8);
    NetD::Input in = net.make_input(10);
    for (Eigen::Index i = 0; i < in.grid.size(); ++i) in.grid.data()[i] = rng.below(2);
    for (Eigen::Index i = 0; i < in.vector.size(); ++i) in.vector.data()[i] = rng.uniform();
    LossBatch b;
    {
      const auto out = net.forward(in);
      for (int i = 0; i < 10; ++i) {
        const int a = static_cast<int>(rng.below(kNumActions));
        const auto lp = log_softmax(out.logits.col(i).data());
        b.actions.push_back(a);
        const double shift = (i % 3 == 0) ? rng.uniform(-1.0, 1.0) : rng.uniform(-0.1, 0.1);
        b.old_log_probs.push_back(lp[a] + shift);
        b.advantages.push_back(rng.uniform(-2.0, 2.0));
        b.returns.push_back(rng.uniform(-1.0, 1.0));
        b.policy_mask.push_back(i % 5 == 4 ? 0.0 : 1.0);
      }
    }
    const LossWeights w{0.2, 0.05, 0.5};
    auto loss = [&] {
      const auto out = net.forward(in);
      return ppo_loss<double>(out.logits, out.values, b, w, nullptr, nullptr).total;
    };
    NetD::Cache cache;
    NetD::Output out;
    net.forward(in, cache, out);
    NetD::Mat d_logits, d_values;
    ppo_loss<double>(out.logits, out.values, b, w, &d_logits, &d_values);
    std::vector<double> grad(net.parameter_count(), 0.0);
    net.backward(cache, d_logits, d_values, grad);
    const double h = 1e-6;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      double& p = net.parameters()[i];
      const double saved = p;
      p = saved + h;
      const double up = loss();
      p = saved - h;
      const double down = loss();
      p = saved;
      const double fd = (up - down) / (2 * h);
      const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
      worst_grad = std::max(worst_grad, std::abs(fd - grad[i]) / scale);
    }
  }
  return {worst_gae <= 1e-9 && worst_grad <= 1e-3 && params <= 200,
          fmt("GAE: 1000 sequences, worst |fast - brute force| = %.3g (limit 1e-9); "
              "loss gradient on a %zu-parameter network: worst relative error vs central "
              "differences = %.3g (limit 1e-3)",
              worst_gae, params, worst_grad)};
}

// ---------------------------------------------------------------------------
// 6. Determinism

struct RunArtifacts {
  std::string curves;
  std::string replay;
  std::vector<std::string> hashes;
};

RunArtifacts short_run(const RunConfig& cfg) {
  RunArtifacts a;
  const TrainingResult r = train(cfg.train);
  std::ostringstream curves;
  curves << curve_csv_header() << '\n';
  for (const auto& row : r.curve) curves << curve_csv_row(row) << '\n';
  a.curves = curves.str();

  auto net = std::make_shared<const ActorCritic<float>>(r.checkpoints.back().make_network());
  PolicyController policy(net, cfg.train.mode);
  const Lineup lineup{&policy, &policy, &policy, &policy};
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng trng(derive_seed(seed, 1));
    const auto targets = random_targets(trng);
    std::ostringstream log;
    ReplayWriter writer(log);
    Rng prng(derive_seed(seed, 2));
    run_episode(cfg.train.env, seed, lineup, targets, prng, cfg.train.reward, &writer);
    a.replay += log.str();
    std::istringstream in(log.str());
    for (std::string line; std::getline(in, line);) {
      const auto j = nlohmann::json::parse(line);
      if (j.contains("hash")) a.hashes.push_back(j["hash"].get<std::string>());
    }
  }
  return a;
}

Verdict determinism(const RunConfig& desk) {
  RunConfig cfg = desk;
  cfg.train.threads = 1;
  cfg.train.total_steps = 3L * cfg.train.hyper.buffer_size;
  cfg.train.checkpoint_interval = 0;
  const RunArtifacts a = short_run(cfg);
  const RunArtifacts b = short_run(cfg);
  const bool same = a.curves == b.curves && a.hashes == b.hashes && a.replay == b.replay;
  return {same && !a.hashes.empty(),
          fmt("two %ld-step runs: curve CSVs %s (%zu bytes), replay hashes %s (%zu states)",
              cfg.train.total_steps, a.curves == b.curves ? "identical" : "DIFFER",
              a.curves.size(), a.hashes == b.hashes ? "identical" : "DIFFER", a.hashes.size())};
}

// ---------------------------------------------------------------------------
// 7-9 share trained policies.

struct Trained {
  std::shared_ptr<const ActorCritic<float>> ubcl;
  std::shared_ptr<const ActorCritic<float>> winonly;
  double ubcl_seconds = 0.0;
  double winonly_seconds = 0.0;
};

std::shared_ptr<const ActorCritic<float>> train_policy(TrainOptions o, RewardMode mode,
                                                       double* seconds) {
  o.mode = mode;
  o.checkpoint_interval = 0;
  const auto t0 = std::chrono::steady_clock::now();
  TrainCallbacks cb;
  long last = 0;
  // Episode-weighted sums since the last progress line.
  double ret = 0.0, err = 0.0;
  long episodes = 0;
  cb.on_curve = [&](const CurveRow& row) {
    if (row.episodes > 0) {
      ret += row.mean_return * row.episodes;
      err += row.mean_behavior_error * row.episodes;
      episodes += row.episodes;
    }
    if (row.step - last >= o.total_steps / 20 || row.step >= o.total_steps) {
      last = row.step;
      const double n = static_cast<double>(std::max(episodes, 1L));
      std::cerr << fmt("  [%s] step %ld/%ld  episodes %ld  return %.4f  error %.4f  entropy %.3f  %.0fs\n",
                       mode_name(mode), row.step, o.total_steps, episodes, ret / n, err / n,
                       row.stats.entropy, seconds_since(t0));
      ret = err = 0.0;
      episodes = 0;
    }
  };
  const TrainingResult r = train(o, cb);
  *seconds = seconds_since(t0);
  return std::make_shared<const ActorCritic<float>>(r.checkpoints.back().make_network());
}

constexpr std::uint64_t kEvalSeed = 0x5eed0e7a1;

double mean_error(const std::vector<EvalRecord>& records) {
  double s = 0.0;
  for (const auto& r : records) s += r.error;
  return s / static_cast<double>(records.size());
}

Verdict learning_signal(const RunConfig& desk, Trained& trained) {
  if (!trained.ubcl) {
    trained.ubcl = train_policy(desk.train, RewardMode::kUbcl, &trained.ubcl_seconds);
  }
  EvalProtocol protocol;
  protocol.n_episodes = 100;
  protocol.seed = kEvalSeed;
  PolicyController policy(trained.ubcl, RewardMode::kUbcl);
  RandomController random;
  const double trained_error =
      mean_error(run_episodes(desk.train.env, {&policy, &policy, &policy, &policy}, protocol));
  const double random_error =
      mean_error(run_episodes(desk.train.env, {&random, &random, &random, &random}, protocol));
  const double ratio = trained_error / random_error;
  return {ratio <= 0.70,
          fmt("%ld agent transitions (%ld arena steps) on %dx%d in %.0fs; 100 episodes x 4 "
              "agents: trained error %.4f, random error %.4f, ratio %.3f (limit 0.70)",
              desk.train.total_steps, desk.train.total_steps / kNumPlayers,
              desk.train.env.grid_width, desk.train.env.grid_height, trained.ubcl_seconds,
              trained_error, random_error, ratio)};
}

Verdict diversity(const RunConfig& desk, Trained& trained) {
  if (!trained.ubcl) {
    trained.ubcl = train_policy(desk.train, RewardMode::kUbcl, &trained.ubcl_seconds);
  }
  if (!trained.winonly) {
    trained.winonly = train_policy(desk.train, RewardMode::kWinOnly, &trained.winonly_seconds);
  }
  EvalProtocol protocol;
  protocol.n_episodes = 300;
  protocol.seed = kEvalSeed + 1;
  PolicyController u(trained.ubcl, RewardMode::kUbcl);
  PolicyController w(trained.winonly, RewardMode::kWinOnly);
  const auto records = run_episodes(desk.train.env, {&u, &u, &u, &w}, protocol);
  std::vector<Vec6> uv, wv;
  for (const auto& r : records) (r.agent == 3 ? wv : uv).push_back(r.result.values);
  const DiversityStats d = diversity_metrics(uv, wv);
  const double ratio = d.ubcl.mean_pairwise_distance / d.winonly.mean_pairwise_distance;
  return {ratio >= 1.5 && d.winonly_within_ubcl_bbox,
          fmt("300 episodes (3 UBCL + 1 win-only): mean pairwise distance UBCL %.4f vs "
              "win-only %.4f, ratio %.3f (limit 1.5); win-only PCA hull %s the UBCL bounding "
              "box; hull areas %.4f vs %.4f",
              d.ubcl.mean_pairwise_distance, d.winonly.mean_pairwise_distance, ratio,
              d.winonly_within_ubcl_bbox ? "inside" : "NOT inside", d.ubcl.hull_area,
              d.winonly.hull_area)};
}

// ---------------------------------------------------------------------------
// 9. Export fidelity

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

Verdict export_fidelity(const RunConfig& desk, const Trained& trained) {
  std::shared_ptr<const ActorCritic<float>> net = trained.ubcl;
  if (!net) {
    ActorCritic<float> fresh(desk.train.network);
    Rng init(derive_seed(desk.train.seed, 0));
    fresh.initialize(init);
    net = std::make_shared<const ActorCritic<float>>(std::move(fresh));
  }
  PolicyController policy(net, RewardMode::kUbcl);
  std::vector<std::string> problems;

  // Radar: recompute mean and sigma from the per-episode CSV.
  EvalProtocol protocol;
  protocol.n_episodes = 50;
  protocol.seed = kEvalSeed + 2;
  protocol.fixed_target = TargetVector{{1, 0, 0, 0.5, 0.5, 0.5}};
  const EvalRun run = run_fixed_target_eval(desk.train.env, policy, policy, protocol);
  std::ostringstream episodes_csv, radar_csv;
  write_episode_csv(episodes_csv, run.records);
  write_radar_csv(radar_csv, run.radar);
  const auto episode_rows = parse_csv(episodes_csv.str());
  const auto radar_rows = parse_csv(radar_csv.str());
  Vec6 mean{}, var{};
  int n = 0;
  std::vector<std::array<double, 6>> results;
  for (const auto& row : episode_rows) {
    if (std::stoi(row[1]) != 0) continue;
    std::array<double, 6> r{};
    for (int d = 0; d < kBehaviorDims; ++d) r[d] = std::stod(row[9 + d]);
    results.push_back(r);
    for (int d = 0; d < kBehaviorDims; ++d) mean[d] += r[d];
    ++n;
  }
  for (int d = 0; d < kBehaviorDims; ++d) mean[d] /= n;
  for (const auto& r : results) {
    for (int d = 0; d < kBehaviorDims; ++d) var[d] += (r[d] - mean[d]) * (r[d] - mean[d]);
  }
  int radar_mismatch = 0;
  for (int d = 0; d < kBehaviorDims; ++d) {
    radar_mismatch += radar_rows[d][2] != format_sig6(mean[d]);
    radar_mismatch += radar_rows[d][3] != format_sig6(std::sqrt(var[d] / n));
  }

  // PCA and error statistics over random-target episodes.
  EvalProtocol random_targets;
  random_targets.n_episodes = 100;
  random_targets.seed = kEvalSeed + 3;
  const auto records =
      run_episodes(desk.train.env, {&policy, &policy, &policy, &policy}, random_targets);
  std::vector<BehaviorVector> res;
  std::vector<TargetVector> tgt;
  std::vector<std::pair<BehaviorVector, TargetVector>> pairs;
  for (const auto& r : records) {
    res.push_back(r.result);
    tgt.push_back(r.target);
    pairs.emplace_back(r.result, r.target);
  }
  const PCAProjection pca = project_pca(res, tgt);
  std::vector<std::vector<double>> cov(6, std::vector<double>(6, 0.0));
  std::array<double, 6> m{};
  const double count = static_cast<double>(res.size());
  for (const auto& x : res) {
    for (int d = 0; d < 6; ++d) m[d] += x[d] / count;
  }
  for (const auto& x : res) {
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) cov[a][b] += (x[a] - m[a]) * (x[b] - m[b]) / count;
    }
  }
  const auto [vals, vecs] = oracle::jacobi_eigen(cov);
  double worst_axis = 0.0;
  for (int k = 0; k < 2; ++k) {
    double dot = 0.0;
    for (int d = 0; d < 6; ++d) dot += pca.axes[k][d] * vecs[k][d];
    const double sign = dot < 0 ? -1.0 : 1.0;
    for (int d = 0; d < 6; ++d) {
      worst_axis = std::max(worst_axis, std::abs(pca.axes[k][d] - sign * vecs[k][d]));
    }
  }

  const ErrorStats stats = error_stats(pairs);
  std::ostringstream stats_csv;
  write_error_stats_csv(stats_csv, stats);
  const auto stat_rows = parse_csv(stats_csv.str());
  int quartile_mismatch = 0;
  for (int d = 0; d < kBehaviorDims; ++d) {
    std::vector<double> e;
    for (const auto& [b, t] : pairs) e.push_back(b[d] - t[d]);
    const double q[3] = {oracle::quantile(e, 0.25), oracle::quantile(e, 0.5),
                         oracle::quantile(e, 0.75)};
    const double got[3] = {stats.dims[d].q1, stats.dims[d].median, stats.dims[d].q3};
    for (int k = 0; k < 3; ++k) {
      quartile_mismatch += got[k] != q[k];
      quartile_mismatch += stat_rows[d][1 + k] != format_sig6(q[k]);
    }
  }

  return {radar_mismatch == 0 && worst_axis <= 1e-6 && quartile_mismatch == 0,
          fmt("radar mean/sigma recomputed from %d episode rows: %d mismatches; PCA axes vs "
              "Jacobi oracle: worst deviation %.3g (limit 1e-6); quartiles vs sort oracle: %d "
              "mismatches",
              n, radar_mismatch, worst_axis, quartile_mismatch)};
}

}  // namespace
}  // namespace ubcl

int main(int argc, char** argv) {
  using namespace ubcl;
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::string config_path = std::string(UBCL_SOURCE_DIR) + "/configs/desk.json";
  app.add_option("--only", only, "Criteria to run")->delimiter(',');
  app.add_option("--config", config_path, "Training config for criteria 6-9");
  CLI11_PARSE(app, argc, argv);

  RunConfig desk;
  try {
    desk = load_run_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  }

  Trained trained;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"telescoping return", [] { return telescoping(); }},
      {"maximum return", [] { return max_return(); }},
      {"target sampler", [] { return sampler(); }},
      {"replay metric oracle", [] { return replay_oracle(); }},
      {"GAE and gradients", [] { return numerics(); }},
      {"determinism", [&] { return determinism(desk); }},
      {"learning signal", [&] { return learning_signal(desk, trained); }},
      {"diversity vs win-only", [&] { return diversity(desk, trained); }},
      {"export fidelity", [&] { return export_fidelity(desk, trained); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << criteria[i].first
              << ", " << fmt("%.1fs", seconds_since(t0)) << "): " << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
