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

#include <cmath>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "edgeq/errors.h"

namespace edgeq {
namespace {

Eigen::VectorXd ToVector(const Observation& s) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(s.size()));
  for (size_t i = 0; i < s.size(); ++i) v[static_cast<Eigen::Index>(i)] = s[i];
  return v;
}

}  // namespace

Mlp::Mlp(std::span<const int> topology)
    : topology_(topology.begin(), topology.end()) {
  if (topology_.size() < 2) {
    throw Error(ErrorCode::kInvalidConfig, "topology needs >= 2 widths");
  }
  for (size_t l = 0; l + 1 < topology_.size(); ++l) {
    if (topology_[l] <= 0 || topology_[l + 1] <= 0) {
      throw Error(ErrorCode::kInvalidConfig, "layer widths must be positive");
    }
    weights_.push_back(Eigen::MatrixXd::Zero(topology_[l + 1], topology_[l]));
    biases_.push_back(Eigen::VectorXd::Zero(topology_[l + 1]));
  }
}

Mlp Mlp::GlorotUniform(std::span<const int> topology, Rng& rng) {
  Mlp net(topology);
  for (size_t l = 0; l < net.weights_.size(); ++l) {
    Eigen::MatrixXd& w = net.weights_[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    // Row-major fill order so the draw sequence does not depend on storage.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
    }
  }
  return net;
}

Eigen::MatrixXd Mlp::Forward(const Eigen::MatrixXd& inputs) const {
  Eigen::MatrixXd h = inputs;
  for (size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l] * h;
    z.colwise() += biases_[l];
    if (l + 1 < weights_.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

Eigen::VectorXd Mlp::Forward(const Eigen::VectorXd& input) const {
  Eigen::VectorXd h = input;
  for (size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * h + biases_[l];
    if (l + 1 < weights_.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

size_t Mlp::NumParameters() const {
  size_t n = 0;
  for (size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

bool Mlp::AllFinite() const {
  for (size_t l = 0; l < weights_.size(); ++l) {
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
  }
  return true;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.topology_ != b.topology_) return false;
  for (size_t l = 0; l < a.weights_.size(); ++l) {
    if (a.weights_[l] != b.weights_[l] || a.biases_[l] != b.biases_[l]) {
      return false;
    }
  }
  return true;
}

double MlpGradient::Norm() const {
  double s = 0.0;
  for (const auto& w : weights) s += w.squaredNorm();
  for (const auto& b : biases) s += b.squaredNorm();
  return std::sqrt(s);
}

bool MlpGradient::AllFinite() const {
  for (const auto& w : weights) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases) {
    if (!b.allFinite()) return false;
  }
  return true;
}

QValues Forward(const Mlp& net, const Observation& state) {
  const Eigen::VectorXd q = net.Forward(ToVector(state));
  if (q.size() != kNumActions) {
    throw Error(ErrorCode::kInvalidConfig, "network output width must be 2");
  }
  return {q[0], q[1]};
}

ReplayBuffer::ReplayBuffer(size_t capacity) : data_(capacity) {
  if (capacity == 0) {
    throw Error(ErrorCode::kInvalidConfig, "replay capacity must be > 0");
  }
}

void ReplayBuffer::Push(const Transition& t) {
  data_[next_] = t;
  next_ = (next_ + 1) % data_.size();
  if (size_ < data_.size()) ++size_;
}

const Transition& ReplayBuffer::At(size_t i) const {
  const size_t oldest = (next_ + data_.size() - size_) % data_.size();
  return data_[(oldest + i) % data_.size()];
}

std::vector<size_t> ReplayBuffer::SampleIndices(size_t count, Rng& rng) const {
  if (size_ == 0) {
    throw Error(ErrorCode::kInvalidConfig, "cannot sample an empty buffer");
  }
  std::uniform_int_distribution<size_t> pick(0, size_ - 1);
  std::vector<size_t> idx(count);
  for (size_t& i : idx) i = pick(rng);
  return idx;
}

double TdTarget(double reward, const QValues& target_q,
                const std::array<double, kNumActions>& noise, double gamma) {
  double best = target_q[0] + noise[0];
  for (int a = 1; a < kNumActions; ++a) {
    best = std::max(best, target_q[a] + noise[a]);
  }
  return reward + gamma * best;
}

namespace {

Eigen::MatrixXd StackStates(std::span<const TdSample> batch) {
  Eigen::MatrixXd x(4, static_cast<Eigen::Index>(batch.size()));
  for (size_t i = 0; i < batch.size(); ++i) {
    for (int k = 0; k < 4; ++k) {
      x(k, static_cast<Eigen::Index>(i)) = batch[i].state[static_cast<size_t>(k)];
    }
  }
  return x;
}

}  // namespace

double TdLoss(const Mlp& net, std::span<const TdSample> batch) {
  if (batch.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "empty TD batch");
  }
  const Eigen::MatrixXd q = net.Forward(StackStates(batch));
  double sum = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const double r = batch[i].target -
                     (q(ToIndex(batch[i].action), static_cast<Eigen::Index>(i)) +
                      batch[i].noise);
    sum += r * r;
  }
  return sum / static_cast<double>(batch.size());
}

double TdLossGradient(const Mlp& net, std::span<const TdSample> batch,
                      MlpGradient& grad) {
  if (batch.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "empty TD batch");
  }
  const size_t n_layers = net.num_layers();
  const auto n = static_cast<Eigen::Index>(batch.size());

  // Forward pass keeping every layer's activation.
  std::vector<Eigen::MatrixXd> act(n_layers + 1);
  act[0] = StackStates(batch);
  for (size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = net.weight(l) * act[l];
    z.colwise() += net.bias(l);
    if (l + 1 < n_layers) z = z.cwiseMax(0.0);
    act[l + 1] = std::move(z);
  }

  // dL/dQ is nonzero only at the taken action.
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(act[n_layers].rows(), n);
  double sum = 0.0;
  const double scale = 2.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const TdSample& s = batch[static_cast<size_t>(i)];
    const int a = ToIndex(s.action);
    const double r = s.target - (act[n_layers](a, i) + s.noise);
    sum += r * r;
    delta(a, i) = -scale * r;
  }

  grad.weights.resize(n_layers);
  grad.biases.resize(n_layers);
  for (size_t l = n_layers; l-- > 0;) {
    grad.weights[l].noalias() = delta * act[l].transpose();
    grad.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = net.weight(l).transpose() * delta;
      // ReLU derivative; act[l] > 0 exactly where the pre-activation was.
      delta = back.cwiseProduct((act[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return sum / static_cast<double>(n);
}

void ApplyGradient(Mlp& net, const MlpGradient& grad, double lr,
                   std::optional<double> clip_norm) {
  if (!grad.AllFinite()) {
    throw Error(ErrorCode::kNonFiniteGradient, "gradient has non-finite entries");
  }
  double step = lr;
  if (clip_norm) {
    const double norm = grad.Norm();
    if (norm > *clip_norm) step *= *clip_norm / norm;
  }
  for (size_t l = 0; l < net.num_layers(); ++l) {
    net.weight(l) -= step * grad.weights[l];
    net.bias(l) -= step * grad.biases[l];
  }
}

double GradAndStep(Mlp& net, std::span<const TdSample> batch, double lr,
                   std::optional<double> clip_norm) {
  if (!(lr > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "learning rate must be > 0");
  }
  MlpGradient grad;
  const double loss = TdLossGradient(net, batch, grad);
  ApplyGradient(net, grad, lr, clip_norm);
  return loss;
}

Action Argmax(const QValues& q) {
  int best = 0;
  for (int a = 1; a < kNumActions; ++a) {
    if (q[a] > q[best]) best = a;
  }
  return static_cast<Action>(best);
}

Action EpsilonGreedy(const QValues& q, double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, kNumActions - 1);
    return static_cast<Action>(pick(rng));
  }
  return Argmax(q);
}

void SaveCheckpoint(const Mlp& net, std::ostream& out) {
  const auto& topo = net.topology();
  for (size_t i = 0; i < topo.size(); ++i) {
    out << (i ? " " : "") << topo[i];
  }
  out << '\n';
  std::ostringstream line;
  line.precision(17);
  for (size_t l = 0; l < net.num_layers(); ++l) {
    const Eigen::MatrixXd& w = net.weight(l);
    line.str("");
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        line << ((r || c) ? " " : "") << w(r, c);
      }
    }
    out << line.str() << '\n';
    line.str("");
    const Eigen::VectorXd& b = net.bias(l);
    for (Eigen::Index r = 0; r < b.size(); ++r) line << (r ? " " : "") << b[r];
    out << line.str() << '\n';
  }
}

Mlp LoadCheckpoint(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) {
    throw Error(ErrorCode::kSchemaMismatch, "checkpoint is empty");
  }
  std::istringstream hs(header);
  std::vector<int> topo{std::istream_iterator<int>(hs), std::istream_iterator<int>()};
  Mlp net(topo);
  for (size_t l = 0; l < net.num_layers(); ++l) {
    Eigen::MatrixXd& w = net.weight(l);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        if (!(in >> w(r, c))) {
          throw Error(ErrorCode::kSchemaMismatch, "checkpoint truncated");
        }
      }
    }
    Eigen::VectorXd& b = net.bias(l);
    for (Eigen::Index r = 0; r < b.size(); ++r) {
      if (!(in >> b[r])) {
        throw Error(ErrorCode::kSchemaMismatch, "checkpoint truncated");
      }
    }
  }
  return net;
}

}  // namespace edgeq
