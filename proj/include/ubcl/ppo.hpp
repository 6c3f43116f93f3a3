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

#ifndef UBCL_PPO_HPP_
#define UBCL_PPO_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ubcl/adam.hpp"
#include "ubcl/arena.hpp"
#include "ubcl/errors.hpp"
#include "ubcl/network.hpp"
#include "ubcl/observation.hpp"
#include "ubcl/rng.hpp"

namespace ubcl {

enum class LrSchedule { kLinear, kConstant };
enum class BetaSchedule { kConstant };

struct PPOHyperparams {
  int batch_size = 1024;
  int buffer_size = 10240;
  double learning_rate = 3e-4;
  LrSchedule lr_schedule = LrSchedule::kLinear;
  double beta = 5e-3;
  BetaSchedule beta_schedule = BetaSchedule::kConstant;
  double epsilon = 0.2;
  double lambd = 0.95;
  double gamma = 0.99;
  int epochs = 3;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  bool normalize_advantages = true;
  friend bool operator==(const PPOHyperparams&, const PPOHyperparams&) = default;
};

inline std::vector<std::string> validate(const PPOHyperparams& h) {
  std::vector<std::string> v;
  if (h.batch_size < 1) v.push_back("ppo.batch_size must be >= 1");
  if (h.buffer_size < 1) v.push_back("ppo.buffer_size must be >= 1");
  if (h.batch_size >= 1 && h.buffer_size >= 1 && h.buffer_size % h.batch_size != 0) {
    v.push_back("ppo.buffer_size must be a multiple of ppo.batch_size");
  }
  if (!(h.learning_rate > 0)) v.push_back("ppo.learning_rate must be > 0");
  if (!(h.beta >= 0)) v.push_back("ppo.beta must be >= 0");
  if (!(h.epsilon > 0)) v.push_back("ppo.epsilon must be > 0");
  if (!(h.lambd >= 0 && h.lambd <= 1)) v.push_back("ppo.lambd must be in [0, 1]");
  if (!(h.gamma > 0 && h.gamma <= 1)) v.push_back("ppo.gamma must be in (0, 1]");
  if (h.epochs < 1) v.push_back("ppo.epochs must be >= 1");
  if (!(h.value_coef >= 0)) v.push_back("ppo.value_coef must be >= 0");
  return v;
}

inline double scheduled_learning_rate(const PPOHyperparams& h, double progress) {
  if (h.lr_schedule == LrSchedule::kConstant) return h.learning_rate;
  return std::max(h.learning_rate * (1.0 - std::clamp(progress, 0.0, 1.0)), 1e-10);
}

// ---------------------------------------------------------------------------
// Categorical policy over the six actions.

template <typename Scalar>
std::array<double, kNumActions> log_softmax(const Scalar* logits) {
  std::array<double, kNumActions> out{};
  double m = static_cast<double>(logits[0]);
  for (int i = 1; i < kNumActions; ++i) m = std::max(m, static_cast<double>(logits[i]));
  double z = 0.0;
  for (int i = 0; i < kNumActions; ++i) z += std::exp(static_cast<double>(logits[i]) - m);
  const double log_z = m + std::log(z);
  for (int i = 0; i < kNumActions; ++i) out[i] = static_cast<double>(logits[i]) - log_z;
  return out;
}

inline double categorical_entropy(const std::array<double, kNumActions>& log_p) {
  double h = 0.0;
  for (double lp : log_p) h -= std::exp(lp) * lp;
  return h;
}

struct ActResult {
  Action action = Action::kWait;
  double log_prob = 0.0;
  double value = 0.0;
  std::array<double, kNumActions> log_probs{};
};

// Samples (or, when greedy, takes the argmax of) the categorical
// distribution defined by `logits`.
template <typename Scalar>
ActResult sample_action(const Scalar* logits, double value, Rng& rng, bool greedy) {
  for (int i = 0; i < kNumActions; ++i) {
    if (!std::isfinite(static_cast<double>(logits[i]))) {
      throw NumericFault("policy produced non-finite logit " + std::to_string(i) +
                         " = " + std::to_string(static_cast<double>(logits[i])));
    }
  }
  if (!std::isfinite(value)) {
    throw NumericFault("value head produced non-finite estimate");
  }
  ActResult r;
  r.value = value;
  r.log_probs = log_softmax(logits);
  int a = 0;
  if (greedy) {
    for (int i = 1; i < kNumActions; ++i) {
      if (logits[i] > logits[a]) a = i;
    }
  } else {
    const double u = rng.uniform();
    double cum = 0.0;
    a = kNumActions - 1;
    for (int i = 0; i < kNumActions; ++i) {
      cum += std::exp(r.log_probs[i]);
      if (u < cum) {
        a = i;
        break;
      }
    }
  }
  r.action = static_cast<Action>(a);
  r.log_prob = r.log_probs[a];
  return r;
}

// Writes one observation into column `col` of a network input.
template <typename Scalar>
void fill_input(const ObservationBundle& obs, typename ActorCritic<Scalar>::Input& in,
                Eigen::Index col) {
  Scalar* g = in.grid.col(col).data();
  for (std::size_t i = 0; i < obs.grid.size(); ++i) g[i] = static_cast<Scalar>(obs.grid[i]);
  write_vector_input(obs, in.vector.col(col).data());
}

template <typename Scalar>
ActResult act(const ActorCritic<Scalar>& net, const ObservationBundle& obs, Rng& rng,
              bool greedy = false) {
  auto in = net.make_input(1);
  fill_input<Scalar>(obs, in, 0);
  const auto out = net.forward(in);
  return sample_action(out.logits.col(0).data(), static_cast<double>(out.values(0, 0)),
                       rng, greedy);
}

// ---------------------------------------------------------------------------
// Generalized advantage estimation.

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// dones[t] != 0 means the episode ended after step t, so values beyond it
// are not bootstrapped. `bootstrap_value` is V of the state after the last
// step.
inline GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                             std::span<const std::uint8_t> dones, double bootstrap_value,
                             double gamma, double lambd) {
  if (rewards.size() != values.size() || rewards.size() != dones.size()) {
    throw ContractError("compute_gae: rewards, values and dones differ in length (" +
                        std::to_string(rewards.size()) + ", " +
                        std::to_string(values.size()) + ", " +
                        std::to_string(dones.size()) + ")");
  }
  const std::size_t n = rewards.size();
  GaeResult r;
  r.advantages.assign(n, 0.0);
  r.returns.assign(n, 0.0);
  double next_value = bootstrap_value;
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double not_done = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * next_value * not_done - values[t];
    running = delta + gamma * lambd * not_done * running;
    r.advantages[t] = running;
    r.returns[t] = running + values[t];
    next_value = values[t];
  }
  return r;
}

// ---------------------------------------------------------------------------
// Clipped surrogate loss.

inline double clipped_surrogate(double ratio, double advantage, double epsilon) {
  return std::min(ratio * advantage,
                  std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage);
}

struct LossWeights {
  double epsilon = 0.2;
  double beta = 5e-3;
  double value_coef = 0.5;
};

struct LossBatch {
  std::vector<int> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  std::vector<double> returns;
  // 0 excludes a sample from the policy and entropy terms (forced actions).
  std::vector<double> policy_mask;
};

struct LossTerms {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// loss = -mean(min(r A, clip(r) A)) + c_v mean((V - R)^2) - beta mean(H)
// Policy and entropy means run over unmasked samples. Fills the gradients
// with respect to logits and values when the pointers are non-null.
template <typename Scalar>
LossTerms ppo_loss(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& logits,
                   const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& values,
                   const LossBatch& batch, const LossWeights& w,
                   Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>* d_logits,
                   Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>* d_values) {
  const Eigen::Index n = logits.cols();
  if (static_cast<std::size_t>(n) != batch.actions.size()) {
    throw ContractError("ppo_loss: batch size mismatch");
  }
  double masked = 0.0;
  for (double m : batch.policy_mask) masked += m;
  const double inv_policy = masked > 0 ? 1.0 / masked : 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  if (d_logits) d_logits->setZero(logits.rows(), n);
  if (d_values) d_values->setZero(1, n);

  LossTerms t;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v_err = static_cast<double>(values(0, i)) - batch.returns[i];
    t.value += v_err * v_err * inv_n;
    if (d_values) (*d_values)(0, i) = static_cast<Scalar>(2.0 * w.value_coef * v_err * inv_n);

    const double mask = batch.policy_mask[i];
    if (mask == 0.0) continue;
    const auto log_p = log_softmax(logits.col(i).data());
    const int a = batch.actions[i];
    const double log_ratio = log_p[a] - batch.old_log_probs[i];
    const double ratio = std::exp(log_ratio);
    const double adv = batch.advantages[i];
    const double unclipped = ratio * adv;
    const double clipped = std::clamp(ratio, 1.0 - w.epsilon, 1.0 + w.epsilon) * adv;
    const bool clip_active = clipped < unclipped;
    t.policy -= mask * std::min(unclipped, clipped) * inv_policy;
    if (std::abs(ratio - 1.0) > w.epsilon) t.clip_fraction += mask * inv_policy;
    t.approx_kl += mask * ((ratio - 1.0) - log_ratio) * inv_policy;
    const double h = categorical_entropy(log_p);
    t.entropy += mask * h * inv_policy;

    if (d_logits) {
      // d(-surrogate)/d(log pi(a)); zero on the clipped branch.
      const double d_logp = clip_active ? 0.0 : -mask * unclipped * inv_policy;
      for (int j = 0; j < kNumActions; ++j) {
        const double p = std::exp(log_p[j]);
        double g = d_logp * ((j == a ? 1.0 : 0.0) - p);
        // d(-beta H)/d(logit_j) = beta * p_j (log p_j + H)
        g += w.beta * mask * inv_policy * p * (log_p[j] + h);
        (*d_logits)(j, i) = static_cast<Scalar>(g);
      }
    }
  }
  t.total = t.policy + w.value_coef * t.value - w.beta * t.entropy;
  return t;
}

// ---------------------------------------------------------------------------
// Rollout storage. Transitions are grouped into streams (one per agent per
// environment instance); stream-major, time-minor.

struct RolloutBuffer {
  int n_streams = 0;
  int horizon = 0;
  int grid_size = 0;
  int vector_size = 0;
  std::vector<std::uint8_t> grids;
  std::vector<float> vectors;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  std::vector<std::uint8_t> forced;  // action not sampled from the policy
  std::vector<double> bootstrap;     // value after the last step, per stream
  std::vector<double> advantages;
  std::vector<double> returns;

  RolloutBuffer() = default;
  RolloutBuffer(int streams, int steps, int grid, int vec) { resize(streams, steps, grid, vec); }

  void resize(int streams, int steps, int grid, int vec) {
    n_streams = streams;
    horizon = steps;
    grid_size = grid;
    vector_size = vec;
    const std::size_t n = size();
    grids.assign(n * grid, 0);
    vectors.assign(n * vec, 0.0f);
    actions.assign(n, 0);
    log_probs.assign(n, 0.0);
    values.assign(n, 0.0);
    rewards.assign(n, 0.0);
    dones.assign(n, 0);
    forced.assign(n, 0);
    bootstrap.assign(streams, 0.0);
    advantages.assign(n, 0.0);
    returns.assign(n, 0.0);
  }

  void clear() { resize(n_streams, horizon, grid_size, vector_size); }

  std::size_t size() const { return static_cast<std::size_t>(n_streams) * horizon; }
  std::size_t index(int stream, int t) const {
    return static_cast<std::size_t>(stream) * horizon + t;
  }

  void store_observation(std::size_t i, const ObservationBundle& obs) {
    std::copy(obs.grid.begin(), obs.grid.end(), grids.begin() + i * grid_size);
    write_vector_input(obs, vectors.data() + i * vector_size);
  }

  // GAE per stream into advantages/returns.
  void finish(double gamma, double lambd) {
    for (int s = 0; s < n_streams; ++s) {
      const std::size_t b = index(s, 0);
      const auto r = compute_gae(
          std::span<const double>(rewards.data() + b, horizon),
          std::span<const double>(values.data() + b, horizon),
          std::span<const std::uint8_t>(dones.data() + b, horizon), bootstrap[s], gamma, lambd);
      std::copy(r.advantages.begin(), r.advantages.end(), advantages.begin() + b);
      std::copy(r.returns.begin(), r.returns.end(), returns.begin() + b);
    }
  }
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;
  double learning_rate = 0.0;
  double advantage_mean = 0.0;  // after normalization
  double advantage_std = 0.0;
  int minibatches = 0;
};

// Clipped-surrogate PPO over the buffer: GAE, optional advantage
// normalization, then `epochs` shuffled passes of batch_size minibatches
// with Adam. On a non-finite loss the parameters are restored to their
// state before the update and NumericFault is thrown.
template <typename Scalar>
UpdateStats ppo_update(ActorCritic<Scalar>& net, Adam<Scalar>& opt, RolloutBuffer& buf,
                       const PPOHyperparams& hyper, double learning_rate, Rng& rng) {
  using Mat = typename ActorCritic<Scalar>::Mat;
  buf.finish(hyper.gamma, hyper.lambd);
  const std::size_t n = buf.size();
  UpdateStats stats;
  stats.learning_rate = learning_rate;

  std::vector<double> adv = buf.advantages;
  if (hyper.normalize_advantages && n > 1) {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / n);
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);
  }
  {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    stats.advantage_mean = mean;
    stats.advantage_std = std::sqrt(var / n);
  }

  const std::vector<Scalar> snapshot(net.parameters().begin(), net.parameters().end());
  AlignedVector<Scalar> grad(net.parameter_count());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t mb = std::min<std::size_t>(hyper.batch_size, n);
  const LossWeights weights{hyper.epsilon, hyper.beta, hyper.value_coef};

  typename ActorCritic<Scalar>::Input in;
  typename ActorCritic<Scalar>::Cache cache;
  typename ActorCritic<Scalar>::Output out;
  Mat d_logits, d_values;
  LossBatch lb;

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start + mb <= n; start += mb) {
      in = net.make_input(static_cast<Eigen::Index>(mb));
      lb.actions.resize(mb);
      lb.old_log_probs.resize(mb);
      lb.advantages.resize(mb);
      lb.returns.resize(mb);
      lb.policy_mask.resize(mb);
      for (std::size_t k = 0; k < mb; ++k) {
        const std::size_t j = order[start + k];
        Scalar* g = in.grid.col(static_cast<Eigen::Index>(k)).data();
        const std::uint8_t* src = buf.grids.data() + j * buf.grid_size;
        for (int q = 0; q < buf.grid_size; ++q) g[q] = static_cast<Scalar>(src[q]);
        const float* vsrc = buf.vectors.data() + j * buf.vector_size;
        Scalar* v = in.vector.col(static_cast<Eigen::Index>(k)).data();
        for (int q = 0; q < buf.vector_size; ++q) v[q] = static_cast<Scalar>(vsrc[q]);
        lb.actions[k] = buf.actions[j];
        lb.old_log_probs[k] = buf.log_probs[j];
        lb.advantages[k] = adv[j];
        lb.returns[k] = buf.returns[j];
        lb.policy_mask[k] = buf.forced[j] ? 0.0 : 1.0;
      }
      net.forward(in, cache, out);
      const LossTerms lt = ppo_loss<Scalar>(out.logits, out.values, lb, weights, &d_logits, &d_values);
      if (!std::isfinite(lt.total)) {
        std::copy(snapshot.begin(), snapshot.end(), net.parameters().begin());
        throw NumericFault("ppo_update: non-finite loss (policy=" + std::to_string(lt.policy) +
                           ", value=" + std::to_string(lt.value) +
                           ", entropy=" + std::to_string(lt.entropy) + ") in epoch " +
                           std::to_string(epoch));
      }
      std::fill(grad.begin(), grad.end(), Scalar(0));
      net.backward(cache, d_logits, d_values, grad);
      double sq = 0.0;
      for (Scalar g : grad) sq += static_cast<double>(g) * g;
      const double gnorm = std::sqrt(sq);
      if (!std::isfinite(gnorm)) {
        std::copy(snapshot.begin(), snapshot.end(), net.parameters().begin());
        throw NumericFault("ppo_update: non-finite gradient norm in epoch " +
                           std::to_string(epoch));
      }
      if (hyper.max_grad_norm > 0 && gnorm > hyper.max_grad_norm) {
        const auto scale = static_cast<Scalar>(hyper.max_grad_norm / gnorm);
        for (Scalar& g : grad) g *= scale;
      }
      opt.step(net.parameters(), grad, learning_rate);

      stats.policy_loss += lt.policy;
      stats.value_loss += lt.value;
      stats.entropy += lt.entropy;
      stats.approx_kl += lt.approx_kl;
      stats.clip_fraction += lt.clip_fraction;
      stats.grad_norm += gnorm;
      ++stats.minibatches;
    }
  }
  if (stats.minibatches > 0) {
    const double k = 1.0 / stats.minibatches;
    stats.policy_loss *= k;
    stats.value_loss *= k;
    stats.entropy *= k;
    stats.approx_kl *= k;
    stats.clip_fraction *= k;
    stats.grad_norm *= k;
  }
  buf.clear();
  return stats;
}

}  // namespace ubcl

#endif  // UBCL_PPO_HPP_
