// Copyright 2026 The EdgeQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "edgeq/qnet.h"

#include <array>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "edgeq/errors.h"
#include "edgeq/privacy.h"
#include "edgeq/random.h"
#include "oracles.h"

namespace edgeq {
namespace {

constexpr std::array<int, 4> kSmall = {4, 8, 8, 2};

std::vector<TdSample> RandomBatch(Rng& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<TdSample> batch(static_cast<size_t>(n));
  for (TdSample& s : batch) {
    for (double& x : s.state) x = u(rng);
    s.action = u(rng) > 0 ? Action::kOffload : Action::kLocal;
    s.target = 3.0 * u(rng);
    s.noise = 0.2 * u(rng);
  }
  return batch;
}

Mlp RandomNet(Rng& rng, std::span<const int> topo) {
  Mlp net = Mlp::GlorotUniform(topo, rng);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (size_t l = 0; l < net.num_layers(); ++l) {
    for (Eigen::Index i = 0; i < net.bias(l).size(); ++i) net.bias(l)[i] = u(rng);
  }
  return net;
}

TEST(MlpTest, TopologyAndParameterCount) {
  const Mlp net;
  EXPECT_EQ(net.topology(), (std::vector<int>{4, 128, 128, 2}));
  EXPECT_EQ(net.NumParameters(), 4u * 128 + 128 + 128 * 128 + 128 + 128 * 2 + 2);
}

TEST(MlpTest, ZeroNetworkGivesZero) {
  const Mlp net;
  EXPECT_EQ(Forward(net, {0.3, 0.1, 0.0, 1.0}), (QValues{0.0, 0.0}));
}

TEST(MlpTest, BiasPassThrough) {
  Mlp net;
  net.bias(2)[0] = -1.5;
  net.bias(2)[1] = 2.25;
  EXPECT_EQ(Forward(net, {0.9, 0.2, 0.4, 0.5}), (QValues{-1.5, 2.25}));
}

TEST(MlpTest, LipschitzContinuity) {
  Rng rng = MakeStream(8, "agent");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Mlp net = RandomNet(rng, kQNetworkTopology);
    // Slack for the power-iteration estimate.
    const double bound = EstimateLipschitz(net) * 1.001;
    for (int k = 0; k < 50; ++k) {
      Observation a, b;
      for (size_t i = 0; i < 4; ++i) {
        a[i] = u(rng);
        b[i] = u(rng);
      }
      const QValues qa = Forward(net, a), qb = Forward(net, b);
      double dq = 0.0, ds = 0.0;
      for (int i = 0; i < 2; ++i) dq += (qa[i] - qb[i]) * (qa[i] - qb[i]);
      for (size_t i = 0; i < 4; ++i) ds += (a[i] - b[i]) * (a[i] - b[i]);
      EXPECT_LE(std::sqrt(dq), bound * std::sqrt(ds) + 1e-12);
    }
  }
}

TEST(MlpTest, BatchedForwardMatchesSingle) {
  Rng rng = MakeStream(2, "agent");
  const Mlp net = RandomNet(rng, kQNetworkTopology);
  const auto batch = RandomBatch(rng, 17);
  Eigen::MatrixXd x(4, 17);
  for (int i = 0; i < 17; ++i) {
    for (int k = 0; k < 4; ++k) x(k, i) = batch[i].state[k];
  }
  const Eigen::MatrixXd q = net.Forward(x);
  for (int i = 0; i < 17; ++i) {
    const QValues single = Forward(net, batch[i].state);
    EXPECT_NEAR(q(0, i), single[0], 1e-12);
    EXPECT_NEAR(q(1, i), single[1], 1e-12);
  }
}

TEST(MlpTest, GlorotIsDeterministicAndBounded) {
  Rng a = MakeStream(5, "agent"), b = MakeStream(5, "agent");
  const Mlp na = Mlp::GlorotUniform(kQNetworkTopology, a);
  const Mlp nb = Mlp::GlorotUniform(kQNetworkTopology, b);
  EXPECT_TRUE(na == nb);
  for (size_t l = 0; l < na.num_layers(); ++l) {
    const auto& w = na.weight(l);
    const double limit = std::sqrt(6.0 / (w.rows() + w.cols()));
    EXPECT_LE(w.cwiseAbs().maxCoeff(), limit);
    EXPECT_TRUE(na.bias(l).isZero());
  }
}

TEST(TdTest, TargetExamples) {
  EXPECT_EQ(TdTarget(-5.0, {-10.0, -20.0}, {0.0, 0.0}, 0.0), -5.0);
  EXPECT_DOUBLE_EQ(TdTarget(-5.0, {-10.0, -20.0}, {0.0, 0.0}, 0.98), -14.8);
  EXPECT_DOUBLE_EQ(TdTarget(-5.0, {-12.0, -11.0}, {2.0, 1.0}, 0.98), -14.8);
}

TEST(TdTest, LossExamples) {
  Rng rng = MakeStream(3, "agent");
  Mlp net;
  net.bias(2)[0] = 0.5;
  std::vector<TdSample> batch = {{{0, 0, 0, 1}, Action::kLocal, 1.0, 0.5}};
  EXPECT_EQ(TdLoss(net, batch), 0.0);
  batch[0].noise = -0.5;
  EXPECT_EQ(TdLoss(net, batch), 1.0);
  const Mlp random = RandomNet(rng, kQNetworkTopology);
  EXPECT_GE(TdLoss(random, RandomBatch(rng, 32)), 0.0);
}

TEST(TdTest, GradientMatchesFiniteDifferences) {
  Rng rng = MakeStream(2718, "agent");
  for (int trial = 0; trial < 50; ++trial) {
    const Mlp net = RandomNet(rng, kSmall);
    const auto batch = RandomBatch(rng, 16);
    EXPECT_LT(oracle::GradientRelativeError(net, batch), 1e-4) << trial;
  }
}

TEST(TdTest, ZeroGradientLeavesParameters) {
  Mlp net;
  std::vector<TdSample> batch = {{{0.1, 0.2, 0.3, 0.4}, Action::kOffload, 0.0, 0.0}};
  const Mlp before = net;
  GradAndStep(net, batch, 0.1);
  EXPECT_TRUE(net == before);
}

TEST(TdTest, SmallStepDescends) {
  Rng rng = MakeStream(99, "agent");
  for (int trial = 0; trial < 10; ++trial) {
    Mlp net = RandomNet(rng, kQNetworkTopology);
    const auto batch = RandomBatch(rng, 64);
    const double before = GradAndStep(net, batch, 1e-6);
    EXPECT_LE(TdLoss(net, batch), before);
  }
}

TEST(TdTest, NonFiniteGradientIsRejected) {
  Mlp net(kSmall);
  std::vector<TdSample> batch = {{{0.1, 0.2, 0.3, 0.4}, Action::kLocal,
                                  std::numeric_limits<double>::infinity(), 0.0}};
  try {
    GradAndStep(net, batch, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteGradient);
  }
}

TEST(TdTest, ClipLimitsStepNorm) {
  Rng rng = MakeStream(4, "agent");
  const Mlp net = RandomNet(rng, kSmall);
  auto batch = RandomBatch(rng, 8);
  for (auto& s : batch) s.target *= 1000.0;
  MlpGradient g;
  TdLossGradient(net, batch, g);
  ASSERT_GT(g.Norm(), 10.0);
  Mlp clipped = net;
  ApplyGradient(clipped, g, 1.0, 10.0);
  double moved = 0.0;
  for (size_t l = 0; l < net.num_layers(); ++l) {
    moved += (clipped.weight(l) - net.weight(l)).squaredNorm() +
             (clipped.bias(l) - net.bias(l)).squaredNorm();
  }
  EXPECT_NEAR(std::sqrt(moved), 10.0, 1e-9);
}

TEST(TargetSyncTest, CopyIsIsolated) {
  Rng rng = MakeStream(6, "agent");
  Mlp online = RandomNet(rng, kQNetworkTopology);
  Mlp target = online;
  const auto batch = RandomBatch(rng, 8);
  for (const auto& s : batch) {
    EXPECT_EQ(Forward(online, s.state), Forward(target, s.state));
  }
  const Mlp frozen = target;
  GradAndStep(online, batch, 0.01);
  EXPECT_TRUE(target == frozen);
  EXPECT_FALSE(online == target);
  target = online;
  target = online;
  EXPECT_TRUE(target == online);
}

TEST(EpsilonGreedyTest, Examples) {
  Rng rng = MakeStream(1, "agent");
  EXPECT_EQ(EpsilonGreedy({-1.0, -2.0}, 0.0, rng), Action::kLocal);
  EXPECT_EQ(EpsilonGreedy({-2.0, -1.0}, 0.0, rng), Action::kOffload);
  EXPECT_EQ(EpsilonGreedy({3.0, 3.0}, 0.0, rng), Action::kLocal);
  EXPECT_EQ(Argmax({3.0, 3.0}), Action::kLocal);
}

TEST(EpsilonGreedyTest, FullExplorationIsUniform) {
  Rng rng = MakeStream(12, "agent");
  int offload = 0;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    offload += EpsilonGreedy({5.0, -5.0}, 1.0, rng) == Action::kOffload;
  }
  EXPECT_NEAR(static_cast<double>(offload) / kDraws, 0.5, 0.02);
}

Transition Numbered(int i) {
  Transition t;
  t.state = {static_cast<double>(i), 0, 0, 0};
  t.reward = -i;
  return t;
}

TEST(ReplayBufferTest, RingKeepsNewest) {
  ReplayBuffer buf(5);
  for (int i = 0; i < 3; ++i) buf.Push(Numbered(i));
  EXPECT_EQ(buf.size(), 3u);
  for (int i = 3; i < 5 + 4; ++i) buf.Push(Numbered(i));
  EXPECT_EQ(buf.size(), 5u);
  for (size_t i = 0; i < 5; ++i) EXPECT_EQ(buf.At(i).reward, -(4.0 + i));
}

TEST(ReplayBufferTest, SamplesWithinRange) {
  ReplayBuffer buf(2000);
  for (int i = 0; i < 30; ++i) buf.Push(Numbered(i));
  Rng rng = MakeStream(0, "agent");
  const auto idx = buf.SampleIndices(64, rng);
  ASSERT_EQ(idx.size(), 64u);
  for (size_t i : idx) EXPECT_LT(i, 30u);
  EXPECT_THROW(ReplayBuffer(0), Error);
}

TEST(CheckpointTest, RoundTripIsExact) {
  Rng rng = MakeStream(21, "agent");
  const Mlp net = RandomNet(rng, kQNetworkTopology);
  std::stringstream ss;
  SaveCheckpoint(net, ss);
  std::string header;
  std::getline(std::istringstream(ss.str()), header);
  EXPECT_EQ(header, "4 128 128 2");
  const Mlp back = LoadCheckpoint(ss);
  EXPECT_TRUE(back == net);
}

TEST(CheckpointTest, TruncatedIsSchemaMismatch) {
  Rng rng = MakeStream(21, "agent");
  std::stringstream ss;
  SaveCheckpoint(RandomNet(rng, kSmall), ss);
  std::string text = ss.str();
  std::istringstream cut(text.substr(0, text.size() / 2));
  try {
    LoadCheckpoint(cut);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
  }
}

}  // namespace
}  // namespace edgeq
