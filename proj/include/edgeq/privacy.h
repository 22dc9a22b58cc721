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

// Closed-form privacy and utility accounting for DP-DQO training.

#ifndef EDGEQ_PRIVACY_H_
#define EDGEQ_PRIVACY_H_

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "edgeq/env.h"
#include "edgeq/qnet.h"

namespace edgeq {

struct AccountantInputs {
  double epsilon = 0.5;
  double delta = 1e-5;
  double alpha = 0.002;
  double z = 1.0;
  int batch = 64;
  double lipschitz = 1.0;     // D
  double sensitivity = 1.0;   // Delta_F
  int64_t total_steps = 0;    // (Gamma - Gamma_eps) * T
  double sigma = 0.0;         // noise level actually used
  int64_t state_count = 1000; // n
  double gamma = 0.98;

  // Throws Error(kBudgetOutOfRange) for epsilon outside (0, 1) and
  // Error(kInvalidConfig) for the remaining constraints.
  void Validate() const;
};

struct PrivacyReport {
  double psi = 0.0;
  double j_factor = 0.0;
  double sigma_min = 0.0;         // composed bound over all training steps
  double sigma_per_update = 0.0;  // Gaussian mechanism with sqrt(J) sensitivity
  double delta_effective = 0.0;
  bool z_condition_met = false;
  double rkhs_bound = 0.0;
  double utility_bound = 0.0;
  bool sigma_sufficient = false;  // sigma >= sigma_min and z condition holds
};

// J = ((4 alpha (z+1) / Omega)^2 + 4 alpha (z+1) / Omega) D^2.
double JFactor(double alpha, double z, int batch, double lipschitz);

// Squared RKHS-norm bound for general Psi:
//   (1 + Psi/2) (4 alpha D (z+1) / Omega)^2 + D^2 / (2 Psi).
// Equals JFactor when Psi = Omega / (4 alpha (z+1)).
double RkhsNormBound(double alpha, double z, int batch, double lipschitz,
                     double psi);

// J Delta_F sqrt(2 (steps / Omega) ln(e + epsilon / delta)) / epsilon.
double MinSigma(const AccountantInputs& in);

struct EffectiveDelta {
  double delta_effective = 0.0;
  bool z_condition_met = false;  // 2z > 8.68 sqrt(Psi) sigma
};

// delta + exp(-(2z - 8.68 sqrt(Psi) sigma)^2 / 2).
EffectiveDelta ComputeEffectiveDelta(double z, double psi, double sigma,
                                     double delta);

// sqrt(2 ln(1.25 / delta)) sensitivity / epsilon; requires epsilon, delta in
// (0, 1).
double GaussianMechanismSigma(double delta, double sensitivity, double epsilon);

// 2 sqrt(2) sigma / (sqrt(n pi) (1 - gamma)).
double UtilityBound(double sigma, int64_t state_count, double gamma);

PrivacyReport Account(const AccountantInputs& in);

struct SensitivityOptions {
  int grid_points = 33;           // per task-parameter axis
  double reward_clip = 100.0;     // R_max; <= 0 disables clipping
  double lcq_backlog_cycles = 0;  // waiting work assumed ahead of a local task
};

struct SensitivityEstimate {
  double max_cost = 0.0;
  double min_cost = 0.0;
  double unclipped = 0.0;     // max - min over the grid, drop rate 0
  double sensitivity = 0.0;   // after clipping rewards to [-R_max, 0]
  bool unbounded_without_clip = true;  // drop-rate factor diverges
};

// Spread of the per-slot cost over the (size, cycles) box for both actions.
SensitivityEstimate EstimateSensitivity(const EnvConfig& cfg,
                                        const SensitivityOptions& opts = {});

// Largest singular value by power iteration on W^T W from a fixed start.
double SpectralNorm(const Eigen::MatrixXd& w, int max_iterations = 50,
                    double tolerance = 1e-6);

// Product of per-layer spectral norms (ReLU is 1-Lipschitz).
double LipschitzUpperBound(std::span<const Eigen::MatrixXd> weights,
                           int max_iterations = 50, double tolerance = 1e-6);
double EstimateLipschitz(const Mlp& net, int max_iterations = 50,
                         double tolerance = 1e-6);

}  // namespace edgeq

#endif  // EDGEQ_PRIVACY_H_
