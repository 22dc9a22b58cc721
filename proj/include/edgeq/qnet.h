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

#ifndef EDGEQ_QNET_H_
#define EDGEQ_QNET_H_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "edgeq/env.h"
#include "edgeq/random.h"

namespace edgeq {

using QValues = std::array<double, kNumActions>;

inline constexpr std::array<int, 4> kQNetworkTopology = {4, 128, 128, 2};

// Fully connected network, ReLU on hidden layers, identity output.
// Layer l maps width[l] -> width[l+1] with weights stored as
// (width[l+1] x width[l]).
class Mlp {
 public:
  // All-zero parameters.
  explicit Mlp(std::span<const int> topology = kQNetworkTopology);

  // Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static Mlp GlorotUniform(std::span<const int> topology, Rng& rng);

  const std::vector<int>& topology() const { return topology_; }
  size_t num_layers() const { return weights_.size(); }

  Eigen::MatrixXd& weight(size_t l) { return weights_[l]; }
  const Eigen::MatrixXd& weight(size_t l) const { return weights_[l]; }
  Eigen::VectorXd& bias(size_t l) { return biases_[l]; }
  const Eigen::VectorXd& bias(size_t l) const { return biases_[l]; }

  // Column-per-sample evaluation.
  Eigen::MatrixXd Forward(const Eigen::MatrixXd& inputs) const;
  Eigen::VectorXd Forward(const Eigen::VectorXd& input) const;

  size_t NumParameters() const;
  bool AllFinite() const;

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  std::vector<int> topology_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

// Same shapes as the network it was taken from.
struct MlpGradient {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  double Norm() const;
  bool AllFinite() const;
};

QValues Forward(const Mlp& net, const Observation& state);

struct Transition {
  Observation state{};
  Action action = Action::kLocal;
  double reward = 0.0;
  Observation next_state{};
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity = 2000);

  void Push(const Transition& t);
  size_t size() const { return size_; }
  size_t capacity() const { return data_.size(); }
  // i-th oldest stored transition.
  const Transition& At(size_t i) const;
  // Uniform with replacement.
  std::vector<size_t> SampleIndices(size_t count, Rng& rng) const;
  const Transition& Slot(size_t index) const { return data_[index]; }

 private:
  std::vector<Transition> data_;
  size_t next_ = 0;
  size_t size_ = 0;
};

// One term of the noised squared TD loss.
struct TdSample {
  Observation state{};
  Action action = Action::kLocal;
  double target = 0.0;  // y_i
  double noise = 0.0;   // G_{A_i}(S_i), constant w.r.t. parameters
};

// y = R + gamma * max_a (Q^(S', a) + G_a(S')).
double TdTarget(double reward, const QValues& target_q,
                const std::array<double, kNumActions>& noise, double gamma);

// (1/B) sum (y_i - (Q(S_i, A_i) + G_i))^2.
double TdLoss(const Mlp& net, std::span<const TdSample> batch);

// Loss and its gradient by backpropagation.
double TdLossGradient(const Mlp& net, std::span<const TdSample> batch,
                      MlpGradient& grad);

// theta <- theta - lr * grad (optionally rescaled to at most clip_norm).
// Throws Error(kNonFiniteGradient) and leaves the network untouched if any
// gradient entry is non-finite.
void ApplyGradient(Mlp& net, const MlpGradient& grad, double lr,
                   std::optional<double> clip_norm = std::nullopt);

// One gradient-descent step on the batch. Returns the loss before the step.
double GradAndStep(Mlp& net, std::span<const TdSample> batch, double lr,
                   std::optional<double> clip_norm = std::nullopt);

// Uniform random action with probability epsilon, otherwise argmax with ties
// resolved toward action 0. Always consumes one uniform draw; a second one
// when exploring.
Action EpsilonGreedy(const QValues& q, double epsilon, Rng& rng);
Action Argmax(const QValues& q);

// Text checkpoint: first line is the topology (space separated widths), then
// for every layer one line of row-major weights followed by one line of
// biases, all written with 17 significant digits.
void SaveCheckpoint(const Mlp& net, std::ostream& out);
Mlp LoadCheckpoint(std::istream& in);

}  // namespace edgeq

#endif  // EDGEQ_QNET_H_
