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

#include "edgeq/fgpm.h"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "edgeq/errors.h"
#include "edgeq/random.h"
#include "oracles.h"

namespace edgeq {
namespace {

TEST(NoiseScaleTest, Examples) {
  EXPECT_DOUBLE_EQ(NoiseScale(0.002, 1.0, 64), 4000.0);
  EXPECT_DOUBLE_EQ(NoiseScale(0.25, 0.0, 1), 1.0);
  EXPECT_GT(NoiseScale(0.001, 1.0, 64), NoiseScale(0.002, 1.0, 64));
  EXPECT_GT(NoiseScale(0.002, 0.5, 64), NoiseScale(0.002, 1.0, 64));
  EXPECT_LT(NoiseScale(0.002, 1.0, 32), NoiseScale(0.002, 1.0, 64));
  EXPECT_THROW(NoiseScale(0.0, 1.0, 64), Error);
  EXPECT_THROW(NoiseScale(0.002, -1.0, 64), Error);
  EXPECT_THROW(NoiseScale(0.002, 1.0, 0), Error);
}

TEST(ConditionalMeanTest, SymmetricMidpoint) {
  for (double psi : {0.1, 1.0, 3.0, 20.0}) {
    EXPECT_NEAR(ConditionalMean(0.7, 0.7, 1.0, 1.0, 2.0, psi),
                0.7 / std::cosh(psi), 1e-15);
  }
}

TEST(ConditionalMeanTest, ZetaZeroGivesLowerNeighborExactly) {
  for (double g : {0.3, -1.25, 1e-7}) {
    EXPECT_EQ(ConditionalMean(9.0, g, 0.0, 0.4, 0.4, 4000.0), g);
    EXPECT_EQ(ConditionalMean(9.0, g, 0.0, 1.3, 1.3, 0.01), g);
  }
}

TEST(ConditionalMeanTest, LargePsiNoOverflow) {
  const double mu = ConditionalMean(1.0, 1.0, 1.0, 1.0, 2.0, 4000.0);
  EXPECT_TRUE(std::isfinite(mu));
  EXPECT_LE(std::abs(mu), 1e-300);
}

TEST(ConditionalMeanTest, CoincidentNeighborsAreDegenerate) {
  try {
    ConditionalMean(1.0, 1.0, 0.0, 0.0, 0.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateGeometry);
  }
  EXPECT_THROW(ConditionalVariance(0.0, 0.0, 0.0, 1.0, 1.0), Error);
}

TEST(ConditionalVarianceTest, RevisitIsDeterministic) {
  EXPECT_LT(RawVarianceFactor(0.0, 0.5, 0.5, 3.0), 0.0);
  EXPECT_EQ(ConditionalVariance(0.0, 0.5, 0.5, 3.0, 0.7), 0.0);
}

TEST(ConditionalVarianceTest, SymmetricMidpointClosedForm) {
  for (double psi : {0.05, 0.5, 2.0, 10.0}) {
    const double u = std::exp(2.0 * psi);
    EXPECT_NEAR(RawVarianceFactor(1.0, 1.0, 2.0, psi), 1.0 - 2.0 * u / (u + 1.0),
                1e-12);
    EXPECT_EQ(ConditionalVariance(1.0, 1.0, 2.0, psi, 0.5), 0.0);
  }
}

TEST(ConditionalVarianceTest, SmallPsiLimitIsZero) {
  EXPECT_NEAR(RawVarianceFactor(1.0, 1.0, 2.0, 1e-9), 0.0, 1e-8);
  EXPECT_NEAR(RawVarianceFactor(0.3, 0.7, 1.0, 1e-9), 0.0, 1e-8);
}

TEST(ConditionalVarianceTest, ExactOuMatchesBridgeVariance) {
  for (double psi : {0.1, 1.0, 7.0}) {
    for (double zeta : {0.1, 0.5, 0.9}) {
      const double nu = 1.0 - zeta;
      const double a = psi * zeta, c = psi * nu, b = psi;
      const double bridge = (-std::expm1(-2 * a)) * (-std::expm1(-2 * c)) /
                            (-std::expm1(-2 * b));
      EXPECT_NEAR(ExactOuVarianceFactor(zeta, nu, 1.0, psi), bridge, 1e-12);
    }
  }
}

TEST(FgpmFidelityTest, MatchesExtendedPrecisionOracle) {
  Rng rng = MakeStream(2024, "fidelity");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> g(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double psi = std::exp(std::log(1e-3) + unit(rng) * std::log(1e7));
    const double lambda = unit(rng) * 30.0 / psi + 1e-12;
    const double zeta = unit(rng) * lambda;
    const double nu = unit(rng) * lambda;
    const double gp = g(rng), gm = g(rng);

    const oracle::BigValue m = oracle::Mean(gp, gm, zeta, nu, lambda, psi);
    EXPECT_LE(std::abs(ConditionalMean(gp, gm, zeta, nu, lambda, psi) - m.value),
              1e-9 * m.scale)
        << "psi=" << psi << " lambda=" << lambda;

    const oracle::BigValue d = oracle::RawD(zeta, nu, lambda, psi);
    EXPECT_LE(std::abs(RawVarianceFactor(zeta, nu, lambda, psi) - d.value),
              1e-9 * d.scale);
    const double var_oracle = 0.4 * std::clamp(d.value, 0.0, 1.0);
    EXPECT_LE(std::abs(ConditionalVariance(zeta, nu, lambda, psi, 0.4) -
                       var_oracle),
              1e-9 * 0.4 * d.scale);
  }
}

TEST(FgpmStabilityTest, FiniteOverWideGeometry) {
  Rng rng = MakeStream(77, "stability");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto wide = [&] {
    // Mix of log-uniform and exact extremes.
    const double r = unit(rng);
    if (r < 0.05) return 0.0;
    if (r < 0.1) return 1e6;
    return std::exp(std::log(1e-9) + unit(rng) * std::log(1e15));
  };
  for (int i = 0; i < 20000; ++i) {
    const double lambda = std::max(wide(), 1e-12);
    const double zeta = wide(), nu = wide();
    const double psi = std::max(wide(), 1e-12);
    const double mu = ConditionalMean(1.5, -0.5, zeta, nu, lambda, psi);
    const double var = ConditionalVariance(zeta, nu, lambda, psi, 0.9);
    const double var_ou = ConditionalVariance(zeta, nu, lambda, psi, 0.9, true);
    ASSERT_TRUE(std::isfinite(mu)) << zeta << " " << nu << " " << lambda << " " << psi;
    ASSERT_TRUE(std::isfinite(RawVarianceFactor(zeta, nu, lambda, psi)));
    ASSERT_GE(var, 0.0);
    ASSERT_LE(var, 0.9);
    ASSERT_GE(var_ou, 0.0);
    ASSERT_LE(var_ou, 0.9);
  }
}

Observation Obs(double x) { return {x, 0.0, 0.0, 1.0}; }

TEST(NoiseStoreTest, InsertNeighbors) {
  NoiseStore store;
  Neighbors nb = store.Insert(Action::kLocal, -3.0, Obs(0.3));
  EXPECT_FALSE(nb.lower);
  EXPECT_FALSE(nb.upper);
  store.Insert(Action::kLocal, -1.0, Obs(0.1));
  nb = store.Insert(Action::kLocal, -2.0, Obs(0.2));
  ASSERT_TRUE(nb.lower && nb.upper);
  EXPECT_EQ(*nb.lower, Obs(0.3));
  EXPECT_EQ(*nb.upper, Obs(0.1));
  // Sets are per action.
  EXPECT_EQ(store.SetSize(Action::kOffload), 0u);
}

TEST(NoiseStoreTest, EqualRewardsKeepInsertionOrder) {
  NoiseStore store;
  store.Insert(Action::kLocal, -1.0, Obs(0.1));
  const Neighbors nb = store.Insert(Action::kLocal, -1.0, Obs(0.2));
  ASSERT_TRUE(nb.lower);
  EXPECT_EQ(*nb.lower, Obs(0.1));
  EXPECT_FALSE(nb.upper);
}

TEST(NoiseStoreTest, ZeroSigmaEmptyStoreGivesZeroWithoutRng) {
  NoiseStore store;
  FgpmConfig cfg;
  Rng rng = MakeStream(1, "noise");
  const Rng before = rng;
  const auto g = store.InsertAndSample(Action::kLocal, -1.0, Obs(0.5), cfg, rng);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[1], 0.0);
  EXPECT_EQ(rng, before);
}

TEST(NoiseStoreTest, RepeatedSampleIsIdentical) {
  NoiseStore store;
  FgpmConfig cfg;
  cfg.sigma = 0.5;
  Rng rng = MakeStream(1, "noise");
  const auto g1 = store.InsertAndSample(Action::kLocal, -1.0, Obs(0.5), cfg, rng);
  const Rng before = rng;
  const auto g2 = store.InsertAndSample(Action::kOffload, -7.0, Obs(0.5), cfg, rng);
  EXPECT_EQ(g1, g2);
  EXPECT_EQ(rng, before);
}

TEST(NoiseStoreTest, PriorStatistics) {
  FgpmConfig cfg;
  cfg.sigma = 0.5;
  Rng rng = MakeStream(9, "noise");
  constexpr int kDraws = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    NoiseStore store;
    const double g = store.Sample(Action::kLocal, Obs(0.5), {}, cfg, rng);
    sum += g;
    sum2 += g * g;
  }
  const double mean = sum / kDraws;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sum2 / kDraws - mean * mean, 0.25, 0.01);
}

TEST(NoiseStoreTest, SingleNeighborConditional) {
  NoiseStore store;
  FgpmConfig cfg;
  cfg.sigma = 0.0;
  cfg.alpha = 0.25;
  cfg.z = 0.0;
  cfg.batch = 1;  // Psi = 1
  Rng rng = MakeStream(0, "noise");
  const Neighbors first = store.Insert(Action::kLocal, -1.0, Obs(0.0));
  // Seed the neighbor's noise through a nonzero sigma draw.
  FgpmConfig noisy = cfg;
  noisy.sigma = 1.0;
  const double g0 = store.Sample(Action::kLocal, Obs(0.0), first, noisy, rng);
  const Neighbors nb = store.Insert(Action::kLocal, -0.5, Obs(0.5));
  EXPECT_DOUBLE_EQ(store.Sample(Action::kLocal, Obs(0.5), nb, cfg, rng),
                   std::exp(-0.5) * g0);
}

TEST(NoiseStoreTest, ResetClearsEverything) {
  NoiseStore store;
  FgpmConfig cfg;
  cfg.sigma = 0.3;
  Rng rng = MakeStream(4, "noise");
  for (int i = 0; i < 20; ++i) {
    store.InsertAndSample(Action::kLocal, -i, Obs(i * 0.01), cfg, rng);
  }
  store.Reset();
  EXPECT_TRUE(store.Empty());
  EXPECT_FALSE(store.Lookup(Action::kLocal, Obs(0.0)));
  store.Reset();
  EXPECT_TRUE(store.Empty());
  for (Action a : {Action::kLocal, Action::kOffload}) {
    EXPECT_EQ(store.SetSize(a), 0u);
    EXPECT_EQ(store.TableSize(a), 0u);
  }
}

// Random insertion streams: sorted sets stay ordered, every noise key is
// backed by a set entry, revisits return stored values.
TEST(NoiseStorePropertyTest, InvariantsUnderRandomStreams) {
  Rng rng = MakeStream(31, "noise");
  Rng data = MakeStream(31, "data");
  std::uniform_int_distribution<int> grid(0, 30);
  std::uniform_real_distribution<double> reward(-50.0, 0.0);
  for (double sigma : {0.0, 0.1, 0.7}) {
    FgpmConfig cfg;
    cfg.sigma = sigma;
    NoiseStore store;
    std::vector<std::pair<Observation, std::array<double, 2>>> seen;
    for (int i = 0; i < 3000; ++i) {
      const Observation s = {grid(data) / 30.0, grid(data) / 30.0, 0.0, 0.5};
      const Action a = grid(data) % 2 ? Action::kLocal : Action::kOffload;
      const auto g = store.InsertAndSample(a, reward(data), s, cfg, rng);
      for (const auto& [state, value] : seen) {
        if (state == s) ASSERT_EQ(value, g);
      }
      if (seen.size() < 200) seen.emplace_back(s, g);
      for (Action b : {Action::kLocal, Action::kOffload}) {
        const auto r = store.SortedRewards(b);
        ASSERT_TRUE(std::is_sorted(r.begin(), r.end()));
      }
      ASSERT_TRUE(store.TablesCoveredBySets());
    }
  }
}

}  // namespace
}  // namespace edgeq
