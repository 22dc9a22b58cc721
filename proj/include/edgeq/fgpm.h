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

// Function-output Gaussian process mechanism (FGPM) noise for Q-values.
//
// Per action the store keeps a reward-sorted multiset of visited states and a
// table of noise values keyed by exact state. Noise for a new state is drawn
// conditionally on the noise already assigned to its two reward-order
// neighbors using an exponential (Ornstein-Uhlenbeck) kernel with inverse
// length scale Psi.

#ifndef EDGEQ_FGPM_H_
#define EDGEQ_FGPM_H_

#include <array>
#include <cstddef>
#include <map>
#include <optional>

#include "edgeq/env.h"
#include "edgeq/random.h"

namespace edgeq {

// Psi = Omega / (4 alpha (z + 1)).
double NoiseScale(double alpha, double z, int batch);

struct FgpmConfig {
  double sigma = 0.0;  // noise level
  double alpha = 0.002;
  double z = 1.0;  // balance factor
  int batch = 64;
  // Replace the printed conditional variance with the exact OU bridge
  // variance. Off by default; intended for sensitivity studies.
  bool exact_ou_variance = false;

  double Psi() const { return NoiseScale(alpha, z, batch); }
  void Validate() const;
};

// Conditional mean given neighbor noises g_plus = G(S+), g_minus = G(S-),
// zeta = |S - S-|, nu = |S+ - S|, lambda = |S+ - S-|. Evaluated as
// (sinh(Psi zeta) g_plus + sinh(Psi nu) g_minus) / sinh(Psi lambda) with the
// hyperbolic ratios computed without forming exp(Psi lambda). zeta and nu are
// clamped to [0, lambda]; outside that range the expression grows like
// exp(Psi (zeta - lambda)) and has no bridge interpretation.
// Throws Error(kDegenerateGeometry) when lambda == 0.
double ConditionalMean(double g_plus, double g_minus, double zeta, double nu,
                       double lambda, double psi);

// Unclamped variance factor
//   d = 1 - (sinh(Psi zeta) e^{Psi zeta} + sinh(Psi nu) e^{Psi nu}) /
//           sinh(Psi lambda).
// Saturates at -DBL_MAX instead of overflowing.
double RawVarianceFactor(double zeta, double nu, double lambda, double psi);

// Exact OU bridge factor
//   1 - (sinh(Psi zeta) e^{-Psi nu} + sinh(Psi nu) e^{-Psi zeta}) /
//       sinh(Psi lambda).
double ExactOuVarianceFactor(double zeta, double nu, double lambda,
                             double psi);

// sigma * clamp(d, 0, 1).
double ConditionalVariance(double zeta, double nu, double lambda, double psi,
                           double sigma, bool exact_ou = false);

struct Neighbors {
  std::optional<Observation> lower;  // largest reward <= the inserted one
  std::optional<Observation> upper;  // smallest reward > the inserted one
};

class NoiseStore {
 public:
  // Inserts `state` into the sorted set of `set_action` after all entries
  // with reward <= `reward` and reports its neighbors.
  Neighbors Insert(Action set_action, double reward, const Observation& state);

  // Noise G_{noise_action}(state). Returns the stored value if present
  // (no randomness consumed). Otherwise conditions on `nb`, draws, stores and
  // returns. A draw is made only when the variance is positive, so sigma == 0
  // never touches `rng`.
  double Sample(Action noise_action, const Observation& state,
                const Neighbors& nb, const FgpmConfig& cfg, Rng& rng);

  // Insert into the set of `set_action`, then sample noise for every action.
  std::array<double, kNumActions> InsertAndSample(Action set_action,
                                                  double reward,
                                                  const Observation& state,
                                                  const FgpmConfig& cfg,
                                                  Rng& rng);

  std::optional<double> Lookup(Action noise_action,
                               const Observation& state) const;

  void Reset();

  size_t SetSize(Action a) const { return sets_[ToIndex(a)].size(); }
  size_t TableSize(Action a) const { return tables_[ToIndex(a)].size(); }
  bool Empty() const;

  // Rewards of the sorted set in iteration order.
  std::vector<double> SortedRewards(Action a) const;
  // True when every key of every noise table is present in some sorted set.
  bool TablesCoveredBySets() const;

 private:
  std::array<std::multimap<double, Observation>, kNumActions> sets_;
  std::array<std::map<Observation, double>, kNumActions> tables_;
};

}  // namespace edgeq

#endif  // EDGEQ_FGPM_H_
