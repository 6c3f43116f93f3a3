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

// ubcl: train, evaluate, roll out and inspect behavior-conditioned policies.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ubcl/ubcl.hpp"

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};
static_assert(std::atomic<bool>::is_always_lock_free);

extern "C" void on_signal(int) { g_stop.store(true); }

fs::path output_root() {
  const char* root = std::getenv(ubcl::kOutputRootEnv);
  return root && *root ? fs::path(root) : fs::current_path();
}

// Relative paths land under $UBCL_OUTPUT_ROOT when it is set.
fs::path resolve_output(const fs::path& p) { return p.is_absolute() ? p : output_root() / p; }

void make_dirs(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ubcl::IoError("cannot create directory " + p.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::trunc);
  if (!f) throw ubcl::IoError("cannot open " + p.string() + " for writing");
  return f;
}

ubcl::TargetVector parse_target(const std::string& text) {
  ubcl::TargetVector t;
  t.values = ubcl::parse_vec6(text);
  for (int i = 0; i < ubcl::kBehaviorDims; ++i) {
    if (!(t[i] >= 0.0 && t[i] <= 1.0)) {
      throw ubcl::ConfigError("target component " + std::to_string(i + 1) + " is outside [0, 1]");
    }
  }
  if (ubcl::norm(t.values) == 0.0) throw ubcl::ConfigError("target must not be all zeros");
  return t;
}

struct LoadedPolicy {
  ubcl::Checkpoint checkpoint;
  std::shared_ptr<const ubcl::ActorCritic<float>> net;
};

LoadedPolicy load_policy(const fs::path& path) {
  if (!fs::exists(path)) throw ubcl::IoError("checkpoint not found: " + path.string());
  LoadedPolicy p;
  p.checkpoint = ubcl::load_checkpoint(path);
  p.net = std::make_shared<const ubcl::ActorCritic<float>>(p.checkpoint.make_network());
  return p;
}

LoadedPolicy load_winonly_policy(const fs::path& path) {
  LoadedPolicy p = load_policy(path);
  if (p.checkpoint.mode != ubcl::RewardMode::kWinOnly) {
    throw ubcl::ConfigError(path.string() + " holds a " + ubcl::mode_name(p.checkpoint.mode) +
                            " policy, expected a winonly one");
  }
  return p;
}

// The arena a checkpoint is evaluated in: an explicit config file, else the
// config snapshot of the run the checkpoint came from, else the desk defaults.
ubcl::EnvConfig resolve_env(const std::string& config_path, const std::vector<std::string>& sets,
                            const fs::path& checkpoint) {
  ubcl::Json j;
  if (!config_path.empty()) {
    j = ubcl::read_json_file(config_path);
  } else {
    const fs::path manifest = checkpoint.parent_path().parent_path() / "manifest.json";
    if (fs::exists(manifest)) {
      j = ubcl::read_json_file(manifest).at("config");
    } else {
      j = ubcl::to_json(ubcl::default_run_config());
    }
  }
  for (const auto& s : sets) ubcl::apply_override(j, s);
  return ubcl::run_config_from_json(j).train.env;
}

void check_compatible(const ubcl::EnvConfig& env, const ubcl::Checkpoint& c,
                      const std::string& what) {
  const ubcl::NetworkSpec expected = ubcl::network_for(env, c.network);
  if (!(expected == c.network)) {
    throw ubcl::IncompatibleCheckpoint(what + " expects a " +
                                       std::to_string(c.network.in_width) + "x" +
                                       std::to_string(c.network.in_height) +
                                       " arena, the evaluation arena is " +
                                       std::to_string(env.grid_width) + "x" +
                                       std::to_string(env.grid_height));
  }
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config;
  std::vector<std::string> sets;
  std::optional<long> total_steps;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string output_dir;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  ubcl::Json j = ubcl::read_json_file(a.config);
  for (const auto& s : a.sets) ubcl::apply_override(j, s);
  if (a.total_steps) j["total_steps"] = *a.total_steps;
  if (a.seed) j["seed"] = *a.seed;
  if (a.threads) j["threads"] = *a.threads;
  if (!a.output_dir.empty()) j["output_dir"] = a.output_dir;
  const ubcl::RunConfig cfg = ubcl::run_config_from_json(j);
  if (auto v = ubcl::validate(cfg.train); !v.empty()) throw ubcl::ConfigError(std::move(v));

  const fs::path dir = resolve_output(cfg.output_dir);
  make_dirs(dir / "checkpoints");

  ubcl::RunManifest manifest;
  manifest.config = ubcl::to_json(cfg);
  manifest.started = ubcl::utc_timestamp();
  manifest.curves = "curves.csv";
  manifest.write(dir);
  ubcl::write_text_atomic(dir / "config.json", manifest.config.dump(2) + "\n");

  std::ofstream curves = open_out(dir / "curves.csv");
  curves << ubcl::curve_csv_header() << '\n' << std::flush;

  ubcl::TrainCallbacks cb;
  cb.stop = &g_stop;
  cb.on_curve = [&](const ubcl::CurveRow& row) {
    curves << ubcl::curve_csv_row(row) << '\n' << std::flush;
    if (!a.quiet && row.episodes > 0) {
      std::cerr << "step " << row.step << "  return " << row.mean_return << "  error "
                << row.mean_behavior_error << "  entropy " << row.stats.entropy << '\n';
    }
  };
  cb.on_checkpoint = [&](const ubcl::Checkpoint& c) {
    char name[64];
    std::snprintf(name, sizeof(name), "step_%09ld.ckpt", c.step);
    ubcl::save_checkpoint(dir / "checkpoints" / name, c);
    manifest.checkpoints.push_back(std::string("checkpoints/") + name);
    manifest.write(dir);
  };

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const ubcl::TrainingResult result = ubcl::train(cfg.train, cb);
  std::signal(SIGINT, SIG_DFL);
  std::signal(SIGTERM, SIG_DFL);

  curves.close();
  manifest.finished = ubcl::utc_timestamp();
  manifest.status = result.interrupted ? "interrupted" : "completed";
  manifest.write(dir);
  std::cout << dir.string() << '\n';
  return result.interrupted ? ubcl::exit_codes::kInterrupted : ubcl::exit_codes::kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string checkpoint;
  std::string winonly_checkpoint;
  std::string config;
  std::vector<std::string> sets;
  std::string fixed_target;
  int episodes = 50;
  std::uint64_t seed = 0;
  bool greedy = false;
  std::vector<std::string> analyses;
  std::string out = "eval";
};

int cmd_eval(const EvalArgs& a) {
  const LoadedPolicy ubcl_policy = load_policy(a.checkpoint);
  const ubcl::EnvConfig env = resolve_env(a.config, a.sets, a.checkpoint);
  check_compatible(env, ubcl_policy.checkpoint, "checkpoint " + a.checkpoint);

  ubcl::EvalProtocol protocol;
  protocol.n_episodes = a.episodes;
  protocol.seed = a.seed;
  protocol.greedy = a.greedy;
  if (!a.fixed_target.empty()) protocol.fixed_target = parse_target(a.fixed_target);
  if (protocol.n_episodes < 1) throw ubcl::ConfigError("--episodes must be at least 1");

  std::vector<std::string> analyses = a.analyses;
  if (analyses.empty()) {
    analyses = protocol.fixed_target ? std::vector<std::string>{"radar"}
                                     : std::vector<std::string>{"errors", "pca"};
  }
  for (const auto& name : analyses) {
    if (name != "radar" && name != "pca" && name != "errors" && name != "diversity") {
      throw ubcl::ConfigError("unknown analysis '" + name +
                              "' (expected radar, pca, errors or diversity)");
    }
    if (name == "radar" && !protocol.fixed_target) {
      throw ubcl::ConfigError("the radar analysis needs --fixed-target");
    }
    if (name == "diversity" && a.winonly_checkpoint.empty()) {
      throw ubcl::ConfigError("the diversity analysis needs --winonly-checkpoint");
    }
  }
  auto wants = [&](const char* name) {
    return std::find(analyses.begin(), analyses.end(), name) != analyses.end();
  };

  const fs::path out = resolve_output(a.out);
  make_dirs(out);
  ubcl::PolicyController ubcl_ctl(ubcl_policy.net, ubcl_policy.checkpoint.mode, a.greedy);

  if (wants("radar")) {
    const ubcl::EvalRun run = ubcl::run_fixed_target_eval(env, ubcl_ctl, ubcl_ctl, protocol);
    auto f = open_out(out / "radar.csv");
    ubcl::write_radar_csv(f, run.radar);
    auto e = open_out(out / "radar_episodes.csv");
    ubcl::write_episode_csv(e, run.records);
  }

  if (wants("pca") || wants("errors")) {
    ubcl::EvalProtocol random_targets = protocol;
    random_targets.fixed_target.reset();
    const ubcl::Lineup lineup{&ubcl_ctl, &ubcl_ctl, &ubcl_ctl, &ubcl_ctl};
    const auto records = ubcl::run_episodes(env, lineup, random_targets);
    auto e = open_out(out / "episodes.csv");
    ubcl::write_episode_csv(e, records);
    std::vector<ubcl::BehaviorVector> results;
    std::vector<ubcl::TargetVector> targets;
    std::vector<std::pair<ubcl::BehaviorVector, ubcl::TargetVector>> pairs;
    for (const auto& r : records) {
      results.push_back(r.result);
      targets.push_back(r.target);
      pairs.emplace_back(r.result, r.target);
    }
    if (wants("pca")) {
      const auto p = ubcl::project_pca(results, targets);
      auto f = open_out(out / "pca.csv");
      ubcl::write_pca_csv(f, p, std::vector<std::string>(results.size(), "ubcl"));
    }
    if (wants("errors")) {
      auto f = open_out(out / "errors.csv");
      ubcl::write_error_stats_csv(f, ubcl::error_stats(pairs));
    }
  }

  if (wants("diversity")) {
    const LoadedPolicy winonly = load_winonly_policy(a.winonly_checkpoint);
    check_compatible(env, winonly.checkpoint, "checkpoint " + a.winonly_checkpoint);
    ubcl::PolicyController win_ctl(winonly.net, winonly.checkpoint.mode, a.greedy);
    ubcl::EvalProtocol random_targets = protocol;
    random_targets.fixed_target.reset();
    const ubcl::Lineup lineup{&ubcl_ctl, &ubcl_ctl, &ubcl_ctl, &win_ctl};
    const auto records = ubcl::run_episodes(env, lineup, random_targets);
    std::vector<ubcl::Vec6> u, w;
    for (const auto& r : records) (r.agent == 3 ? w : u).push_back(r.result.values);
    const ubcl::DiversityStats d = ubcl::diversity_metrics(u, w);
    auto f = open_out(out / "diversity.csv");
    ubcl::write_diversity_csv(f, d);
    auto e = open_out(out / "diversity_episodes.csv");
    ubcl::write_episode_csv(e, records);
    std::vector<std::string> sources(d.ubcl.points.size(), "ubcl");
    sources.resize(sources.size() + d.winonly.points.size(), "winonly");
    ubcl::PCAProjection both = d.pca;
    both.points = d.ubcl.points;
    both.points.insert(both.points.end(), d.winonly.points.begin(), d.winonly.points.end());
    both.errors.clear();
    auto p = open_out(out / "diversity_pca.csv");
    ubcl::write_pca_csv(p, both, sources);
  }
  std::cout << out.string() << '\n';
  return ubcl::exit_codes::kOk;
}

// ---------------------------------------------------------------------------
// rollout

struct RolloutArgs {
  std::string checkpoint;
  std::string winonly_checkpoint;
  std::string config;
  std::vector<std::string> sets;
  std::string composition = "4ubcl";
  std::string targets;
  std::uint64_t seed = 0;
  bool greedy = false;
  std::string out = "rollout.jsonl";
};

// "3ubcl+1winonly" -> {ubcl, ubcl, ubcl, winonly}.
std::vector<std::string> parse_composition(const std::string& text) {
  std::vector<std::string> slots;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('+', pos), text.size());
    const std::string part = text.substr(pos, end - pos);
    std::size_t digits = 0;
    while (digits < part.size() && std::isdigit(static_cast<unsigned char>(part[digits]))) ++digits;
    const std::string kind = part.substr(digits);
    if (digits == 0 || (kind != "ubcl" && kind != "winonly" && kind != "random")) {
      throw ubcl::ParseError("expected <count><ubcl|winonly|random>", pos);
    }
    const int count = std::stoi(part.substr(0, digits));
    for (int i = 0; i < count && slots.size() <= ubcl::kNumPlayers; ++i) slots.push_back(kind);
    pos = end + 1;
  }
  if (slots.size() != static_cast<std::size_t>(ubcl::kNumPlayers)) {
    throw ubcl::ConfigError("composition '" + text + "' must describe exactly " +
                            std::to_string(ubcl::kNumPlayers) + " agents");
  }
  return slots;
}

int cmd_rollout(const RolloutArgs& a) {
  const std::vector<std::string> slots = parse_composition(a.composition);
  const LoadedPolicy ubcl_policy = load_policy(a.checkpoint);
  const ubcl::EnvConfig env = resolve_env(a.config, a.sets, a.checkpoint);
  check_compatible(env, ubcl_policy.checkpoint, "checkpoint " + a.checkpoint);

  ubcl::PolicyController ubcl_ctl(ubcl_policy.net, ubcl_policy.checkpoint.mode, a.greedy);
  ubcl::RandomController random_ctl;
  std::optional<ubcl::PolicyController> win_ctl;
  if (std::find(slots.begin(), slots.end(), "winonly") != slots.end()) {
    if (a.winonly_checkpoint.empty()) {
      throw ubcl::ConfigError("composition uses winonly agents but --winonly-checkpoint is missing");
    }
    const LoadedPolicy w = load_winonly_policy(a.winonly_checkpoint);
    check_compatible(env, w.checkpoint, "checkpoint " + a.winonly_checkpoint);
    win_ctl.emplace(w.net, w.checkpoint.mode, a.greedy);
  }
  ubcl::Lineup lineup{};
  for (int i = 0; i < ubcl::kNumPlayers; ++i) {
    if (slots[i] == "ubcl") lineup[i] = &ubcl_ctl;
    else if (slots[i] == "winonly") lineup[i] = &*win_ctl;
    else lineup[i] = &random_ctl;
  }

  std::array<ubcl::TargetVector, ubcl::kNumPlayers> targets;
  ubcl::Rng target_rng(ubcl::derive_seed(a.seed, 1));
  for (auto& t : targets) t = ubcl::sample_target(target_rng);
  if (!a.targets.empty()) {
    std::vector<std::string> parts;
    std::stringstream ss(a.targets);
    for (std::string p; std::getline(ss, p, ';');) parts.push_back(p);
    if (parts.size() != targets.size()) {
      throw ubcl::ConfigError("--targets needs " + std::to_string(ubcl::kNumPlayers) +
                              " vectors separated by ';'");
    }
    for (std::size_t i = 0; i < parts.size(); ++i) targets[i] = parse_target(parts[i]);
  }

  const fs::path out = resolve_output(a.out);
  if (out.has_parent_path()) make_dirs(out.parent_path());
  std::ofstream f = open_out(out);
  ubcl::ReplayWriter writer(f);
  ubcl::Rng policy_rng(ubcl::derive_seed(a.seed, 2));
  const auto outcome = ubcl::run_episode(env, a.seed, lineup, targets, policy_rng, {}, &writer);
  f.close();
  if (!f) throw ubcl::IoError("failed writing " + out.string());
  for (int i = 0; i < ubcl::kNumPlayers; ++i) {
    std::cout << "agent " << i << " (" << lineup[i]->tag() << ")  behavior "
              << ubcl::csv_row(outcome.behavior[i].values) << '\n';
  }
  std::cout << out.string() << '\n';
  return ubcl::exit_codes::kOk;
}

// ---------------------------------------------------------------------------
// inspect-checkpoint, verify-replay

int cmd_inspect(const std::string& path) {
  const LoadedPolicy p = load_policy(path);
  ubcl::Json meta = ubcl::checkpoint_metadata(p.checkpoint);
  std::cout << meta.dump(2) << '\n';
  return ubcl::exit_codes::kOk;
}

int cmd_verify(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ubcl::IoError("cannot open replay " + path);
  const ubcl::ReplayCheck check = ubcl::verify_replay(f);
  if (check.ok) {
    std::cout << "ok: " << check.steps_checked << " steps reproduced\n";
    return ubcl::exit_codes::kOk;
  }
  std::cout << "mismatch at step " << check.first_mismatch << '\n';
  return ubcl::exit_codes::kGeneric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavior-conditioned multi-agent policies for a grid arena"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ubcl::kToolVersion));

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a policy from a config file");
  t->add_option("config", train.config, "Run config (JSON)")->required();
  t->add_option("--set", train.sets, "Override a config value, e.g. ppo.learning_rate=1e-4");
  t->add_option("--total-steps", train.total_steps, "Agent transitions to train for");
  t->add_option("--seed", train.seed, "Run seed");
  t->add_option("--threads", train.threads, "Rollout worker threads");
  t->add_option("--output-dir", train.output_dir, "Run directory");
  t->add_flag("--quiet", train.quiet, "No progress output");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint and export CSVs");
  e->add_option("--checkpoint", eval.checkpoint, "Policy checkpoint")->required();
  e->add_option("--winonly-checkpoint", eval.winonly_checkpoint, "Win-only baseline checkpoint");
  e->add_option("--config", eval.config, "Run config describing the arena");
  e->add_option("--set", eval.sets, "Override a config value");
  e->add_option("--fixed-target", eval.fixed_target, "Target for agent 0, e.g. 1,0,0,0.5,0.5,0.5");
  e->add_option("--episodes", eval.episodes, "Episodes to play")->capture_default_str();
  e->add_option("--seed", eval.seed, "Evaluation seed")->capture_default_str();
  e->add_flag("--greedy", eval.greedy, "Pick the most likely action");
  e->add_option("--analyses", eval.analyses, "radar, pca, errors, diversity")->delimiter(',');
  e->add_option("--out", eval.out, "Output directory")->capture_default_str();

  RolloutArgs roll;
  auto* r = app.add_subcommand("rollout", "Play one episode and write its replay log");
  r->add_option("--checkpoint", roll.checkpoint, "Policy checkpoint")->required();
  r->add_option("--winonly-checkpoint", roll.winonly_checkpoint, "Win-only checkpoint");
  r->add_option("--config", roll.config, "Run config describing the arena");
  r->add_option("--set", roll.sets, "Override a config value");
  r->add_option("--composition", roll.composition, "e.g. 4ubcl, 3ubcl+1winonly, 2ubcl+2random")
      ->capture_default_str();
  r->add_option("--targets", roll.targets, "Four targets separated by ';'");
  r->add_option("--seed", roll.seed, "Episode seed")->capture_default_str();
  r->add_flag("--greedy", roll.greedy, "Pick the most likely action");
  r->add_option("--out", roll.out, "Replay log path")->capture_default_str();

  std::string inspect_path;
  auto* i = app.add_subcommand("inspect-checkpoint", "Print checkpoint metadata");
  i->add_option("checkpoint", inspect_path, "Checkpoint file")->required();

  std::string verify_path;
  auto* v = app.add_subcommand("verify-replay", "Re-simulate a replay log and compare hashes");
  v->add_option("replay", verify_path, "Replay log")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : ubcl::exit_codes::kConfig;
  }

  try {
    if (*t) return cmd_train(train);
    if (*e) return cmd_eval(eval);
    if (*r) return cmd_rollout(roll);
    if (*i) return cmd_inspect(inspect_path);
    if (*v) return cmd_verify(verify_path);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return ubcl::exit_code(err);
  }
  return ubcl::exit_codes::kGeneric;
}
