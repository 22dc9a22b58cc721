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

#include "edgeq/privacy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "edgeq/errors.h"
#include "edgeq/fgpm.h"

namespace edgeq {
namespace {

void RequireBudget(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::kBudgetOutOfRange,
                "privacy budget must satisfy 0 < epsilon < 1 (got " +
                    std::to_string(epsilon) + ")");
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidConfig, what);
}

}  // namespace

void AccountantInputs::Validate() const {
  RequireBudget(epsilon);
  Require(delta > 0.0 && delta < 1.0, "delta must be in (0, 1)");
  Require(alpha > 0.0, "alpha must be > 0");
  Require(z >= 0.0, "z must be >= 0");
  Require(batch > 0, "batch must be > 0");
  Require(lipschitz >= 0.0, "lipschitz must be >= 0");
  Require(sensitivity >= 0.0, "sensitivity must be >= 0");
  Require(total_steps >= 0, "steps must be >= 0");
  Require(sigma >= 0.0, "sigma must be >= 0");
  Require(state_count >= 1, "state count must be >= 1");
  Require(gamma >= 0.0 && gamma < 1.0, "gamma must be in [0, 1)");
}

double JFactor(double alpha, double z, int batch, double lipschitz) {
  const double u = 4.0 * alpha * (z + 1.0) / static_cast<double>(batch);
  return (u * u + u) * lipschitz * lipschitz;
}

double RkhsNormBound(double alpha, double z, int batch, double lipschitz,
                     double psi) {
  const double step = 4.0 * alpha * lipschitz * (z + 1.0) / static_cast<double>(batch);
  return (1.0 + psi / 2.0) * step * step +
         lipschitz * lipschitz / (2.0 * psi);
}

double MinSigma(const AccountantInputs& in) {
  in.Validate();
  const double j = JFactor(in.alpha, in.z, in.batch, in.lipschitz);
  const double rounds =
      static_cast<double>(in.total_steps) / static_cast<double>(in.batch);
  const double log_term = std::log(std::numbers::e + in.epsilon / in.delta);
  return j * in.sensitivity * std::sqrt(2.0 * rounds * log_term) / in.epsilon;
}

EffectiveDelta ComputeEffectiveDelta(double z, double psi, double sigma,
                                     double delta) {
  const double gap = 2.0 * z - 8.68 * std::sqrt(psi) * sigma;
  return {delta + std::exp(-gap * gap / 2.0), gap > 0.0};
}

double GaussianMechanismSigma(double delta, double sensitivity,
                              double epsilon) {
  RequireBudget(epsilon);
  Require(delta > 0.0 && delta < 1.0, "delta must be in (0, 1)");
  return std::sqrt(2.0 * std::log(1.25 / delta)) * sensitivity / epsilon;
}

double UtilityBound(double sigma, int64_t state_count, double gamma) {
  Require(state_count >= 1, "state count must be >= 1");
  Require(gamma >= 0.0 && gamma < 1.0, "gamma must be in [0, 1)");
  return 2.0 * std::numbers::sqrt2 * sigma /
         (std::sqrt(static_cast<double>(state_count) * std::numbers::pi) *
          (1.0 - gamma));
}

PrivacyReport Account(const AccountantInputs& in) {
  in.Validate();
  PrivacyReport r;
  r.psi = NoiseScale(in.alpha, in.z, in.batch);
  r.j_factor = JFactor(in.alpha, in.z, in.batch, in.lipschitz);
  r.rkhs_bound = r.j_factor;
  r.sigma_min = MinSigma(in);
  r.sigma_per_update =
      GaussianMechanismSigma(in.delta, std::sqrt(r.j_factor), in.epsilon);
  const EffectiveDelta ed =
      ComputeEffectiveDelta(in.z, r.psi, in.sigma, in.delta);
  r.delta_effective = ed.delta_effective;
  r.z_condition_met = ed.z_condition_met;
  r.utility_bound = UtilityBound(in.sigma, in.state_count, in.gamma);
  r.sigma_sufficient = r.z_condition_met && in.sigma >= r.sigma_min;
  return r;
}

SensitivityEstimate EstimateSensitivity(const EnvConfig& cfg,
                                        const SensitivityOptions& opts) {
  const int n = std::max(2, opts.grid_points);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double size =
        cfg.size_min + (cfg.size_max - cfg.size_min) * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double cycles =
          cfg.cycles_min + (cfg.cycles_max - cfg.cycles_min) * j / (n - 1);
      const TaskSpec task{size, cycles, 0};
      const LatencyEnergy local = LocalCost(opts.lcq_backlog_cycles, task, cfg);
      const LatencyEnergy offload = OffloadCost(task, cfg);
      for (Action a : {Action::kLocal, Action::kOffload}) {
        const double c = ExecutionCost(a, local, offload, cfg.psi_weight);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
    }
  }
  SensitivityEstimate est;
  est.max_cost = hi;
  est.min_cost = lo;
  est.unclipped = hi - lo;
  if (opts.reward_clip > 0.0) {
    est.sensitivity =
        std::min(hi, opts.reward_clip) - std::min(lo, opts.reward_clip);
  } else {
    est.sensitivity = est.unclipped;
  }
  return est;
}

double SpectralNorm(const Eigen::MatrixXd& w, int max_iterations,
                    double tolerance) {
  if (w.size() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(w.cols()).normalized();
  double estimate = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd u = w * v;
    const double un = u.norm();
    if (un == 0.0) return 0.0;
    Eigen::VectorXd next = w.transpose() * (u / un);
    const double nn = next.norm();
    if (nn == 0.0) return 0.0;
    v = next / nn;
    const double prev = estimate;
    estimate = nn;  // ||W^T u|| with u = W v / ||W v|| converges to sigma_max
    if (std::abs(estimate - prev) <= tolerance * estimate) break;
  }
  return estimate;
}

double LipschitzUpperBound(std::span<const Eigen::MatrixXd> weights,
                           int max_iterations, double tolerance) {
  double product = 1.0;
  for (const Eigen::MatrixXd& w : weights) {
    product *= SpectralNorm(w, max_iterations, tolerance);
  }
  return product;
}

double EstimateLipschitz(const Mlp& net, int max_iterations, double tolerance) {
  std::vector<Eigen::MatrixXd> ws;
  for (size_t l = 0; l < net.num_layers(); ++l) ws.push_back(net.weight(l));
  return LipschitzUpperBound(ws, max_iterations, tolerance);
}

}  // namespace edgeq
