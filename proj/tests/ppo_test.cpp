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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "ubcl/ppo.hpp"

namespace ubcl {
namespace {

TEST(Sampling, UniformLogitsGiveEqualProbabilities) {
  const std::array<double, kNumActions> logits{};
  Rng rng(1);
  const ActResult r = sample_action(logits.data(), 0.0, rng, false);
  for (double lp : r.log_probs) EXPECT_NEAR(std::exp(lp), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(categorical_entropy(r.log_probs), std::log(6.0), 1e-12);
}

TEST(Sampling, GreedyTakesArgmax) {
  const std::array<double, kNumActions> logits{0.1, 0.2, -1.0, 0.0, 3.0, 2.9};
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    EXPECT_EQ(sample_action(logits.data(), 0.0, rng, true).action, Action::kAttack);
  }
}

TEST(Sampling, FrequenciesWithinThreeSigma) {
  const std::array<double, kNumActions> logits{0.5, -0.3, 1.2, 0.0, -1.0, 0.7};
  Rng rng(77);
  const int n = 60000;
  std::array<int, kNumActions> counts{};
  std::array<double, kNumActions> lp{};
  for (int k = 0; k < n; ++k) {
    const ActResult r = sample_action(logits.data(), 0.0, rng, false);
    ++counts[static_cast<int>(r.action)];
    lp = r.log_probs;
    ASSERT_DOUBLE_EQ(r.log_prob, r.log_probs[static_cast<int>(r.action)]);
  }
  double z = 0.0;
  for (double l : logits) z += std::exp(l);
  for (int a = 0; a < kNumActions; ++a) {
    const double p = std::exp(logits[a]) / z;
    EXPECT_NEAR(std::exp(lp[a]), p, 1e-12);
    const double sigma = std::sqrt(n * p * (1 - p));
    EXPECT_LT(std::abs(counts[a] - n * p), 3 * sigma) << "action " << a;
  }
}

TEST(Sampling, NonFiniteOutputIsNumericFault) {
  std::array<double, kNumActions> logits{};
  logits[2] = std::nan("");
  Rng rng(1);
  EXPECT_THROW(sample_action(logits.data(), 0.0, rng, false), NumericFault);
  logits[2] = 0.0;
  EXPECT_THROW(sample_action(logits.data(), INFINITY, rng, false), NumericFault);
}

GaeResult gae(const std::vector<double>& r, const std::vector<double>& v,
              const std::vector<std::uint8_t>& d, double boot, double g, double l) {
  return compute_gae(r, v, d, boot, g, l);
}

TEST(Gae, SingleStep) {
  for (double g : {0.5, 0.99}) {
    for (double l : {0.0, 0.95, 1.0}) {
      EXPECT_DOUBLE_EQ(gae({1.0}, {0.0}, {0}, 0.0, g, l).advantages[0], 1.0);
    }
  }
}

TEST(Gae, ZeroLambdaIsOneStepTdError) {
  const std::vector<double> r{0.3, -0.2, 0.5, 1.0};
  const std::vector<double> v{0.1, 0.4, -0.3, 0.2};
  const double boot = 0.7, g = 0.9;
  const auto res = gae(r, v, {0, 0, 0, 0}, boot, g, 0.0);
  for (int t = 0; t < 4; ++t) {
    const double next = t + 1 < 4 ? v[t + 1] : boot;
    EXPECT_DOUBLE_EQ(res.advantages[t], r[t] + g * next - v[t]);
    EXPECT_DOUBLE_EQ(res.returns[t], res.advantages[t] + v[t]);
  }
}

TEST(Gae, MatchesBruteForceSum) {
  Rng rng(31337);
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
    const auto got = gae(r, v, done8, boot, g, l);
    const auto want = oracle::gae_bruteforce(r, v, done, boot, g, l);
    for (int t = 0; t < n; ++t) ASSERT_NEAR(got.advantages[t], want[t], 1e-9);
  }
}

TEST(Gae, LengthMismatchIsContractError) {
  EXPECT_THROW(gae({1.0, 2.0}, {0.0}, {0, 0}, 0.0, 0.99, 0.95), ContractError);
  EXPECT_THROW(gae({1.0}, {0.0}, {0, 0}, 0.0, 0.99, 0.95), ContractError);
}

TEST(Surrogate, ClipsLargeRatio) {
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.5, 1.0, 0.2), 1.2);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, -1.0, 0.2), -0.8);
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.5, -1.0, 0.2), -1.5);
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.1, 2.0, 0.2), 2.2);
}

TEST(Surrogate, RatioOneGradientIsVanillaPolicyGradient) {
  Rng rng(8);
  const int n = 16;
  Eigen::MatrixXd logits(kNumActions, n), values = Eigen::MatrixXd::Zero(1, n);
  LossBatch b;
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < kNumActions; ++a) logits(a, i) = rng.uniform(-2, 2);
    const int a = static_cast<int>(rng.below(kNumActions));
    b.actions.push_back(a);
    b.old_log_probs.push_back(log_softmax(logits.col(i).data())[a]);
    b.advantages.push_back(rng.uniform(-1, 1));
    b.returns.push_back(0.0);
    b.policy_mask.push_back(1.0);
  }
  Eigen::MatrixXd dl, dv;
  const LossTerms t = ppo_loss<double>(logits, values, b, {0.2, 0.0, 0.0}, &dl, &dv);
  EXPECT_NEAR(t.approx_kl, 0.0, 1e-15);
  EXPECT_EQ(t.clip_fraction, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto lp = log_softmax(logits.col(i).data());
    for (int a = 0; a < kNumActions; ++a) {
      const double pg = -b.advantages[i] / n * ((a == b.actions[i]) - std::exp(lp[a]));
      EXPECT_NEAR(dl(a, i), pg, 1e-14);
    }
  }
}

TEST(Surrogate, MaskedSamplesOnlyTrainValue) {
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(kNumActions, 2), values(1, 2);
  values << 0.5, -0.5;
  LossBatch b{{1, 2}, {std::log(1.0 / 6), std::log(1.0 / 6)}, {1.0, -1.0}, {0.0, 0.0}, {1.0, 0.0}};
  Eigen::MatrixXd dl, dv;
  ppo_loss<double>(logits, values, b, {0.2, 0.01, 0.5}, &dl, &dv);
  EXPECT_EQ(dl.col(1).cwiseAbs().sum(), 0.0);
  EXPECT_GT(dl.col(0).cwiseAbs().sum(), 0.0);
  EXPECT_NE(dv(0, 1), 0.0);
}

TEST(Schedule, LinearDecayWithFloor) {
  PPOHyperparams h;
  EXPECT_DOUBLE_EQ(scheduled_learning_rate(h, 0.0), 3e-4);
  EXPECT_DOUBLE_EQ(scheduled_learning_rate(h, 0.5), 1.5e-4);
  EXPECT_DOUBLE_EQ(scheduled_learning_rate(h, 1.0), 1e-10);
  h.lr_schedule = LrSchedule::kConstant;
  EXPECT_DOUBLE_EQ(scheduled_learning_rate(h, 0.9), 3e-4);
}

TEST(Hyperparams, DefaultsAndValidation) {
  const PPOHyperparams h;
  EXPECT_EQ(h.batch_size, 1024);
  EXPECT_EQ(h.buffer_size, 10240);
  EXPECT_DOUBLE_EQ(h.beta, 5e-3);
  EXPECT_DOUBLE_EQ(h.epsilon, 0.2);
  EXPECT_DOUBLE_EQ(h.lambd, 0.95);
  EXPECT_DOUBLE_EQ(h.gamma, 0.99);
  EXPECT_TRUE(validate(h).empty());
  PPOHyperparams bad = h;
  bad.buffer_size = 1000;
  bad.gamma = 1.5;
  bad.epochs = 0;
  EXPECT_EQ(validate(bad).size(), 3u);
}

// A one-stream buffer over a tiny network: constant observation, reward for
// one action only.
struct Bandit {
  NetworkSpec spec;
  ActorCritic<double> net;
  Adam<double> opt;
  RolloutBuffer buf;
  Rng rng{4};

  Bandit() : spec(make_spec()), net(spec), opt(net.parameter_count()) {
    net.initialize(rng);
    buf.resize(4, 32, spec.in_channels * spec.in_height * spec.in_width, spec.vector_size);
  }

  static NetworkSpec make_spec() {
    NetworkSpec s;
    s.in_channels = 1;
    s.in_height = s.in_width = 4;
    s.vector_size = 2;
    s.conv_layers = {{2, 3, 2}};
    s.hidden_widths = {8};
    return s;
  }

  double prob_of(int action) {
    auto in = net.make_input(1);
    in.vector(0, 0) = 1.0;
    const auto out = net.forward(in);
    return std::exp(log_softmax(out.logits.col(0).data())[action]);
  }

  void collect(int good) {
    auto in = net.make_input(1);
    in.vector(0, 0) = 1.0;
    const auto out = net.forward(in);
    for (std::size_t i = 0; i < buf.size(); ++i) {
      const ActResult r = sample_action(out.logits.col(0).data(), out.values(0, 0), rng, false);
      buf.vectors[i * buf.vector_size] = 1.0f;
      buf.actions[i] = static_cast<int>(r.action);
      buf.log_probs[i] = r.log_prob;
      buf.values[i] = r.value;
      buf.rewards[i] = static_cast<int>(r.action) == good ? 1.0 : 0.0;
      buf.dones[i] = 1;
    }
  }
};

TEST(PpoUpdate, ImprovesRewardedAction) {
  Bandit b;
  PPOHyperparams h;
  h.batch_size = 32;
  h.buffer_size = 128;
  h.beta = 0.0;
  const double before = b.prob_of(3);
  for (int it = 0; it < 20; ++it) {
    b.collect(3);
    ppo_update(b.net, b.opt, b.buf, h, 3e-3, b.rng);
  }
  EXPECT_GT(b.prob_of(3), before + 0.3);
}

TEST(PpoUpdate, NormalizesAdvantages) {
  Bandit b;
  PPOHyperparams h;
  h.batch_size = 32;
  h.buffer_size = 128;
  b.collect(1);
  const UpdateStats s = ppo_update(b.net, b.opt, b.buf, h, 1e-3, b.rng);
  EXPECT_NEAR(s.advantage_mean, 0.0, 1e-9);
  EXPECT_NEAR(s.advantage_std, 1.0, 1e-6);
  EXPECT_EQ(s.minibatches, 3 * 4);
}

TEST(PpoUpdate, NonFiniteLossRestoresParameters) {
  Bandit b;
  PPOHyperparams h;
  h.batch_size = 32;
  h.buffer_size = 128;
  b.collect(1);
  b.buf.rewards[5] = std::nan("");
  const std::vector<double> before(b.net.parameters().begin(), b.net.parameters().end());
  EXPECT_THROW(ppo_update(b.net, b.opt, b.buf, h, 1e-3, b.rng), NumericFault);
  const std::vector<double> after(b.net.parameters().begin(), b.net.parameters().end());
  EXPECT_EQ(before, after);
}

}  // namespace
}  // namespace ubcl
