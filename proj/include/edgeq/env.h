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

// Slotted simulation of an edge server (ES) that receives offloading tasks
// from N mobile devices, buffers them in a task request queue (TRQ) and, for
// the task at the head of the TRQ, decides each slot between computing it in
// the local computing queue (LCQ) or sending it to a cloud server over one of
// M orthogonal channels.

#ifndef EDGEQ_ENV_H_
#define EDGEQ_ENV_H_

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include "edgeq/random.h"

namespace edgeq {

enum class Action : int { kLocal = 0, kOffload = 1 };

inline constexpr int kNumActions = 2;

inline int ToIndex(Action a) { return static_cast<int>(a); }
Action ActionFromIndex(int index);

struct TaskSpec {
  double size_mb = 0.0;  // data volume
  double cycles = 0.0;   // required CPU cycles
  int64_t arrival_slot = 0;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct EnvConfig {
  int n_devices = 5;
  double slot_seconds = 1.0;
  double arrival_rate = 0.2;  // per device, per second
  double trq_capacity_mb = 5000.0;
  double lcq_capacity_mb = 2000.0;
  double edge_freq = 5e10;  // cycles per second
  double kappa1 = 1e-11;    // effective capacitance coefficient
  double tx_rate = 5.0;     // MB per second, ES -> cloud
  double tx_power = 0.5;    // W
  int n_channels = 2;
  double psi_weight = 1e-21;  // latency/energy trade-off
  int horizon = 100;          // slots per episode

  double size_min = 5.0;
  double size_max = 50.0;
  double cycles_min = 0.5e11;
  double cycles_max = 2.0e11;

  // Throws Error(kInvalidConfig) on the first violated constraint.
  void Validate() const;

  // Scale used to normalize pending LCQ cycles in observations: an LCQ full
  // of the smallest tasks, each needing the most cycles.
  double CyclesScale() const {
    return lcq_capacity_mb * (cycles_max / size_min);
  }
};

struct LocalJob {
  TaskSpec task;
  double remaining_cycles = 0.0;

  friend bool operator==(const LocalJob&, const LocalJob&) = default;
};

// Full simulator state. The MDP observation (K, K^, P^, w) is derived from the
// queue contents; the counters are cumulative within one episode.
struct EnvState {
  std::deque<TaskSpec> trq;
  std::deque<LocalJob> lcq;
  std::vector<int> channel_busy_slots;  // 0 = free
  int64_t slot = 0;
  int64_t arrived = 0;
  int64_t dropped = 0;
  int64_t dropped_trq = 0;
  int64_t dropped_lcq = 0;
  int64_t completed_local = 0;
  int64_t offloaded = 0;

  static EnvState Initial(const EnvConfig& cfg);

  double TrqMb() const;
  double LcqMb() const;
  double LcqCycles() const;
  int FreeChannels() const;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct LatencyEnergy {
  double latency = 0.0;  // s
  double energy = 0.0;   // J
};

struct CostBreakdown {
  double latency = 0.0;
  double energy = 0.0;
  double exec_cost = 0.0;
  double drop_rate = 0.0;
  double total_cost = 0.0;
};

struct StepInfo {
  int arrivals = 0;
  int arrivals_dropped = 0;
  bool dispatched = false;
  bool head_dropped = false;
  TaskSpec head;
  int channel_slots = 0;  // occupancy assigned on offload
};

struct StepOutcome {
  double reward = 0.0;
  CostBreakdown cost;
  StepInfo info;
};

using Observation = std::array<double, 4>;

// Draws a Poisson(lambda * slot) count per device, each task with independent
// uniform size and cycles. Tasks are ordered by device index, then draw order.
std::vector<TaskSpec> SampleArrivals(Rng& rng, const EnvConfig& cfg,
                                     int64_t slot = 0);

// Local execution: waiting behind `lcq_cycles` plus own execution, and the
// dynamic energy kappa1 * f^2 per cycle.
LatencyEnergy LocalCost(double lcq_cycles, const TaskSpec& task,
                        const EnvConfig& cfg);

// Transmission to the cloud; cloud compute time is ignored.
LatencyEnergy OffloadCost(const TaskSpec& task, const EnvConfig& cfg);

double ExecutionCost(Action action, const LatencyEnergy& local,
                     const LatencyEnergy& offload, double psi_weight);

// C = C0 / (1 - dropped/arrived). Returns C0 when nothing has arrived yet and
// throws Error(kAllDropped) when every arrived task was dropped.
double OverallCost(double exec_cost, int64_t arrived, int64_t dropped);

// Advances one slot in place: arrivals, head dispatch, LCQ drain, channel
// release, cost. Throws Error(kIllegalAction) for an offload with no free
// channel; the state is left untouched in that case.
StepOutcome Step(const EnvConfig& cfg, EnvState& state, Action action,
                 Rng& rng);

Observation Observe(const EnvState& state, const EnvConfig& cfg);

// Owns a config, a state and the arrival stream.
class OffloadingEnv {
 public:
  OffloadingEnv(const EnvConfig& cfg, Rng rng);

  void Reset() { state_ = EnvState::Initial(cfg_); }
  StepOutcome Step(Action action) {
    return edgeq::Step(cfg_, state_, action, rng_);
  }
  Observation Observe() const { return edgeq::Observe(state_, cfg_); }

  const EnvState& state() const { return state_; }
  const EnvConfig& config() const { return cfg_; }

 private:
  EnvConfig cfg_;
  EnvState state_;
  Rng rng_;
};

}  // namespace edgeq

#endif  // EDGEQ_ENV_H_
