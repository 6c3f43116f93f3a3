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

#include "ubcl/network.hpp"
#include "ubcl/ppo.hpp"

namespace ubcl {
namespace {

using NetD = ActorCritic<double>;

NetworkSpec tiny_spec() {
  NetworkSpec s;
  s.in_channels = 2;
  s.in_height = 4;
  s.in_width = 4;
  s.vector_size = 3;
  s.conv_layers = {{2, 3, 2}};
  s.hidden_widths = {4};
  return s;
}

NetD::Input random_input(const NetD& net, int batch, Rng& rng) {
  NetD::Input in = net.make_input(batch);
  for (Eigen::Index i = 0; i < in.grid.size(); ++i) in.grid.data()[i] = rng.below(2);
  for (Eigen::Index i = 0; i < in.vector.size(); ++i) in.vector.data()[i] = rng.uniform();
  return in;
}

// Randomized weights, larger than the initializer's, so every layer
// contributes a visible gradient.
NetD random_net(const NetworkSpec& spec, Rng& rng) {
  NetD net(spec);
  for (double& p : net.parameters()) p = rng.uniform(-0.8, 0.8);
  return net;
}

LossBatch random_batch(const NetD& net, const NetD::Input& in, Rng& rng) {
  const auto out = net.forward(in);
  const int n = static_cast<int>(in.batch());
  LossBatch b;
  for (int i = 0; i < n; ++i) {
    const int a = static_cast<int>(rng.below(kNumActions));
    const auto lp = log_softmax(out.logits.col(i).data());
    b.actions.push_back(a);
    // Mix of ratios inside and well outside the trust region.
    const double shift = (i % 3 == 0) ? rng.uniform(-1.0, 1.0) : rng.uniform(-0.1, 0.1);
    b.old_log_probs.push_back(lp[a] + shift);
    b.advantages.push_back(rng.uniform(-2.0, 2.0));
    b.returns.push_back(rng.uniform(-1.0, 1.0));
    b.policy_mask.push_back(i % 5 == 4 ? 0.0 : 1.0);
  }
  return b;
}

double loss_at(const NetD& net, const NetD::Input& in, const LossBatch& b, const LossWeights& w) {
  const auto out = net.forward(in);
  return ppo_loss<double>(out.logits, out.values, b, w, nullptr, nullptr).total;
}

TEST(Network, TinySpecIsSmall) {
  EXPECT_LE(NetD(tiny_spec()).parameter_count(), 200u);
}

TEST(Network, DeskParameterCount) {
  EXPECT_EQ(ActorCritic<float>(NetworkSpec{}).parameter_count(), 183095u);
}

TEST(Network, RejectsInvalidSpec) {
  NetworkSpec s;
  s.action_count = 5;
  EXPECT_THROW(NetD{s}, ConfigError);
  s = NetworkSpec{};
  s.conv_layers = {{4, 0, 1}};
  EXPECT_FALSE(validate(s).empty());
  s = NetworkSpec{};
  s.hidden_widths = {};
  EXPECT_FALSE(validate(s).empty());
}

TEST(Network, LossGradientMatchesFiniteDifferences) {
  Rng rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    NetD net = random_net(tiny_spec(), rng);
    const auto in = random_input(net, 10, rng);
    const LossBatch batch = random_batch(net, in, rng);
    const LossWeights w{0.2, 0.05, 0.5};

    NetD::Cache cache;
    NetD::Output out;
    net.forward(in, cache, out);
    NetD::Mat d_logits, d_values;
    ppo_loss<double>(out.logits, out.values, batch, w, &d_logits, &d_values);
    std::vector<double> grad(net.parameter_count(), 0.0);
    net.backward(cache, d_logits, d_values, grad);

    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      double& p = net.parameters()[i];
      const double saved = p;
      p = saved + h;
      const double up = loss_at(net, in, batch, w);
      p = saved - h;
      const double down = loss_at(net, in, batch, w);
      p = saved;
      const double fd = (up - down) / (2 * h);
      const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
      worst = std::max(worst, std::abs(fd - grad[i]) / scale);
    }
    EXPECT_LT(worst, 1e-3) << "trial " << trial;
  }
}

TEST(Network, BatchColumnsAreIndependent) {
  Rng rng(3);
  NetD net = random_net(tiny_spec(), rng);
  const auto in = random_input(net, 6, rng);
  const auto all = net.forward(in);
  for (int i = 0; i < 6; ++i) {
    NetD::Input one = net.make_input(1);
    one.grid.col(0) = in.grid.col(i);
    one.vector.col(0) = in.vector.col(i);
    const auto single = net.forward(one);
    for (int a = 0; a < kNumActions; ++a) EXPECT_NEAR(single.logits(a, 0), all.logits(a, i), 1e-12);
    EXPECT_NEAR(single.values(0, 0), all.values(0, i), 1e-12);
  }
}

TEST(Network, BackwardAccumulates) {
  Rng rng(5);
  NetD net = random_net(tiny_spec(), rng);
  const auto in = random_input(net, 4, rng);
  NetD::Cache cache;
  NetD::Output out;
  net.forward(in, cache, out);
  NetD::Mat dl = NetD::Mat::Ones(kNumActions, 4), dv = NetD::Mat::Ones(1, 4);
  std::vector<double> once(net.parameter_count(), 0.0), twice(net.parameter_count(), 0.0);
  net.backward(cache, dl, dv, once);
  net.backward(cache, dl, dv, twice);
  net.backward(cache, dl, dv, twice);
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(twice[i], 2 * once[i], 1e-12);
}

TEST(Network, InitialPolicyIsNearUniform) {
  ActorCritic<float> net{NetworkSpec{}};
  Rng rng(0);
  net.initialize(rng);
  const GameState s = reset(desk_config(), 0);
  double entropy = 0.0;
  for (int agent = 0; agent < kNumPlayers; ++agent) {
    const auto r = act(net, encode_observation(s, agent, {}, sample_target(rng)), rng);
    entropy += categorical_entropy(r.log_probs) / kNumPlayers;
  }
  EXPECT_NEAR(entropy, std::log(6.0), 0.01 * std::log(6.0));
}

TEST(Network, CastPreservesOutputs) {
  Rng rng(6);
  NetD net = random_net(tiny_spec(), rng);
  const auto f = net.cast<float>();
  const auto back = f.cast<double>();
  const auto in = random_input(net, 3, rng);
  const auto a = net.forward(in);
  const auto b = back.forward(in);
  EXPECT_LT((a.logits - b.logits).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Adam<double> opt(3);
  std::vector<double> p{1.0, -1.0, 0.5};
  const std::vector<double> g{0.3, -2.0, 1e-3};
  opt.step(p, g, 0.01);
  EXPECT_NEAR(p[0], 0.99, 1e-6);
  EXPECT_NEAR(p[1], -0.99, 1e-6);
  EXPECT_NEAR(p[2], 0.49, 1e-4);
}

TEST(Adam, MinimizesQuadratic) {
  Adam<double> opt(2);
  std::vector<double> p{3.0, -4.0};
  for (int k = 0; k < 3000; ++k) {
    const std::vector<double> g{2 * p[0], 2 * p[1]};
    opt.step(p, g, 0.01);
  }
  EXPECT_NEAR(p[0], 0.0, 1e-2);
  EXPECT_NEAR(p[1], 0.0, 1e-2);
}

}  // namespace
}  // namespace ubcl
