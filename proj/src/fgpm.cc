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

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "edgeq/errors.h"

namespace edgeq {
namespace {

constexpr double kMaxLogTerm = 700.0;

double Distance(const Observation& a, const Observation& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

void CheckGeometry(double zeta, double nu, double lambda, double psi) {
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "neighbors coincide (lambda = " + std::to_string(lambda) + ")");
  }
  if (!(zeta >= 0.0) || !(nu >= 0.0) || !(psi > 0.0)) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "distances must be >= 0 and psi > 0");
  }
}

// log(sinh(a) / sinh(b)) for 0 <= a <= b, b > 0.
double LogSinhRatio(double a, double b) {
  if (a == 0.0) return -std::numeric_limits<double>::infinity();
  return (a - b) + std::log(-std::expm1(-2.0 * a)) -
         std::log(-std::expm1(-2.0 * b));
}

// sinh(a) / sinh(b) for 0 <= a <= b, b > 0; exactly 1 when a == b.
double SinhRatio(double a, double b) {
  if (a == 0.0) return 0.0;
  return std::exp(a - b) * (std::expm1(-2.0 * a) / std::expm1(-2.0 * b));
}

}  // namespace

double NoiseScale(double alpha, double z, int batch) {
  if (!(alpha > 0.0) || !(z >= 0.0) || batch <= 0) {
    throw Error(ErrorCode::kInvalidConfig,
                "noise scale needs alpha > 0, z >= 0, batch > 0");
  }
  return static_cast<double>(batch) / (4.0 * alpha * (z + 1.0));
}

void FgpmConfig::Validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidConfig, "sigma must be finite and >= 0");
  }
  (void)Psi();
}

double ConditionalMean(double g_plus, double g_minus, double zeta, double nu,
                       double lambda, double psi) {
  CheckGeometry(zeta, nu, lambda, psi);
  const double a = psi * std::min(zeta, lambda);
  const double c = psi * std::min(nu, lambda);
  const double b = psi * lambda;
  return SinhRatio(a, b) * g_plus + SinhRatio(c, b) * g_minus;
}

double RawVarianceFactor(double zeta, double nu, double lambda, double psi) {
  CheckGeometry(zeta, nu, lambda, psi);
  const double b = psi * lambda;
  double total = 0.0;
  for (double x : {std::min(zeta, lambda), std::min(nu, lambda)}) {
    const double a = psi * x;
    // sinh(a) e^a / sinh(b)
    const double log_term = a + LogSinhRatio(a, b);
    if (log_term > kMaxLogTerm) return std::numeric_limits<double>::lowest();
    total += std::exp(log_term);
  }
  return 1.0 - total;
}

double ExactOuVarianceFactor(double zeta, double nu, double lambda,
                             double psi) {
  CheckGeometry(zeta, nu, lambda, psi);
  const double a = psi * std::min(zeta, lambda);
  const double c = psi * std::min(nu, lambda);
  const double b = psi * lambda;
  return 1.0 - (SinhRatio(a, b) * std::exp(-c) + SinhRatio(c, b) * std::exp(-a));
}

double ConditionalVariance(double zeta, double nu, double lambda, double psi,
                           double sigma, bool exact_ou) {
  const double d = exact_ou ? ExactOuVarianceFactor(zeta, nu, lambda, psi)
                            : RawVarianceFactor(zeta, nu, lambda, psi);
  return sigma * std::clamp(d, 0.0, 1.0);
}

Neighbors NoiseStore::Insert(Action set_action, double reward,
                             const Observation& state) {
  auto& set = sets_[ToIndex(set_action)];
  const auto it = set.emplace(reward, state);
  Neighbors nb;
  if (it != set.begin()) nb.lower = std::prev(it)->second;
  if (const auto next = std::next(it); next != set.end()) {
    nb.upper = next->second;
  }
  return nb;
}

double NoiseStore::Sample(Action noise_action, const Observation& state,
                          const Neighbors& nb, const FgpmConfig& cfg,
                          Rng& rng) {
  auto& table = tables_[ToIndex(noise_action)];
  if (const auto found = table.find(state); found != table.end()) {
    return found->second;
  }
  const double psi = cfg.Psi();
  double mean = 0.0;
  double variance = cfg.sigma * cfg.sigma;

  // A neighbor only informs the draw once it has a value for this action.
  auto known = [&](const std::optional<Observation>& s) {
    return s && table.count(*s) > 0;
  };
  const bool has_lower = known(nb.lower);
  const bool has_upper = known(nb.upper);

  auto single_neighbor = [&](const Observation& other) {
    const double delta = Distance(state, other);
    mean = std::exp(-psi * delta) * table.at(other);
    variance = -cfg.sigma * std::expm1(-2.0 * psi * delta);
  };

  if (has_lower && has_upper) {
    const double lambda = Distance(*nb.upper, *nb.lower);
    if (lambda == 0.0) {
      // Both neighbors are the same state; condition on it once.
      single_neighbor(*nb.lower);
    } else {
      const double zeta = Distance(state, *nb.lower);
      const double nu = Distance(*nb.upper, state);
      mean = ConditionalMean(table.at(*nb.upper), table.at(*nb.lower), zeta,
                             nu, lambda, psi);
      variance = ConditionalVariance(zeta, nu, lambda, psi, cfg.sigma,
                                     cfg.exact_ou_variance);
    }
  } else if (has_lower) {
    single_neighbor(*nb.lower);
  } else if (has_upper) {
    single_neighbor(*nb.upper);
  }

  double g = mean;
  if (cfg.sigma > 0.0 && variance > 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    g += std::sqrt(variance) * normal(rng);
  }
  table.emplace(state, g);
  return g;
}

std::array<double, kNumActions> NoiseStore::InsertAndSample(
    Action set_action, double reward, const Observation& state,
    const FgpmConfig& cfg, Rng& rng) {
  const Neighbors nb = Insert(set_action, reward, state);
  std::array<double, kNumActions> g{};
  for (int a = 0; a < kNumActions; ++a) {
    g[a] = Sample(static_cast<Action>(a), state, nb, cfg, rng);
  }
  return g;
}

std::optional<double> NoiseStore::Lookup(Action noise_action,
                                         const Observation& state) const {
  const auto& table = tables_[ToIndex(noise_action)];
  const auto it = table.find(state);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

void NoiseStore::Reset() {
  for (auto& s : sets_) s.clear();
  for (auto& t : tables_) t.clear();
}

bool NoiseStore::Empty() const {
  for (int a = 0; a < kNumActions; ++a) {
    if (!sets_[a].empty() || !tables_[a].empty()) return false;
  }
  return true;
}

std::vector<double> NoiseStore::SortedRewards(Action a) const {
  std::vector<double> out;
  out.reserve(sets_[ToIndex(a)].size());
  for (const auto& [reward, state] : sets_[ToIndex(a)]) out.push_back(reward);
  return out;
}

bool NoiseStore::TablesCoveredBySets() const {
  std::set<Observation> seen;
  for (const auto& s : sets_) {
    for (const auto& [reward, state] : s) seen.insert(state);
  }
  for (const auto& t : tables_) {
    for (const auto& [state, g] : t) {
      if (!seen.count(state)) return false;
    }
  }
  return true;
}

}  // namespace edgeq
