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

#include "edgeq/env.h"

#include <cmath>
#include <numeric>
#include <string>

#include "edgeq/errors.h"

namespace edgeq {
namespace {

void Require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidConfig, what);
}

}  // namespace

Action ActionFromIndex(int index) {
  if (index != 0 && index != 1) {
    throw Error(ErrorCode::kIllegalAction,
                "action index " + std::to_string(index) + " not in {0,1}");
  }
  return static_cast<Action>(index);
}

void EnvConfig::Validate() const {
  Require(n_devices >= 1, "n_devices must be >= 1");
  Require(slot_seconds > 0, "slot_seconds must be > 0");
  Require(arrival_rate >= 0 && std::isfinite(arrival_rate),
          "arrival_rate must be finite and >= 0");
  Require(trq_capacity_mb > 0, "trq_capacity_mb must be > 0");
  Require(lcq_capacity_mb > 0, "lcq_capacity_mb must be > 0");
  Require(edge_freq > 0, "edge_freq must be > 0");
  Require(kappa1 >= 0, "kappa1 must be >= 0");
  Require(tx_rate > 0, "tx_rate must be > 0");
  Require(tx_power >= 0, "tx_power must be >= 0");
  Require(n_channels >= 1, "n_channels must be >= 1");
  Require(psi_weight >= 0, "psi_weight must be >= 0");
  Require(horizon >= 1, "horizon must be >= 1");
  Require(size_min >= 0 && size_min <= size_max, "need 0 <= size_min <= size_max");
  Require(cycles_min >= 0 && cycles_min <= cycles_max,
          "need 0 <= cycles_min <= cycles_max");
  // A single task must fit an empty queue, otherwise the first dispatched
  // task of an episode could be dropped and the overall cost diverges.
  Require(size_max <= trq_capacity_mb, "size_max exceeds trq_capacity_mb");
  Require(size_max <= lcq_capacity_mb, "size_max exceeds lcq_capacity_mb");
  Require(size_min > 0, "size_min must be > 0 (observation scale)");
}

EnvState EnvState::Initial(const EnvConfig& cfg) {
  EnvState s;
  s.channel_busy_slots.assign(static_cast<size_t>(cfg.n_channels), 0);
  return s;
}

double EnvState::TrqMb() const {
  double k = 0.0;
  for (const TaskSpec& t : trq) k += t.size_mb;
  return k;
}

double EnvState::LcqMb() const {
  double k = 0.0;
  for (const LocalJob& j : lcq) k += j.task.size_mb;
  return k;
}

double EnvState::LcqCycles() const {
  double p = 0.0;
  for (const LocalJob& j : lcq) p += j.remaining_cycles;
  return p;
}

int EnvState::FreeChannels() const {
  int w = 0;
  for (int busy : channel_busy_slots) w += (busy == 0);
  return w;
}

std::vector<TaskSpec> SampleArrivals(Rng& rng, const EnvConfig& cfg,
                                     int64_t slot) {
  std::vector<TaskSpec> tasks;
  const double mean = cfg.arrival_rate * cfg.slot_seconds;
  if (mean <= 0.0) return tasks;
  std::poisson_distribution<int> count(mean);
  std::uniform_real_distribution<double> size(cfg.size_min, cfg.size_max);
  std::uniform_real_distribution<double> cycles(cfg.cycles_min, cfg.cycles_max);
  for (int n = 0; n < cfg.n_devices; ++n) {
    const int k = count(rng);
    for (int i = 0; i < k; ++i) {
      TaskSpec t;
      t.size_mb = size(rng);
      t.cycles = cycles(rng);
      t.arrival_slot = slot;
      tasks.push_back(t);
    }
  }
  return tasks;
}

LatencyEnergy LocalCost(double lcq_cycles, const TaskSpec& task,
                        const EnvConfig& cfg) {
  return {(lcq_cycles + task.cycles) / cfg.edge_freq,
          cfg.kappa1 * cfg.edge_freq * cfg.edge_freq * task.cycles};
}

LatencyEnergy OffloadCost(const TaskSpec& task, const EnvConfig& cfg) {
  const double latency = task.size_mb / cfg.tx_rate;
  return {latency, cfg.tx_power * latency};
}

double ExecutionCost(Action action, const LatencyEnergy& local,
                     const LatencyEnergy& offload, double psi_weight) {
  const LatencyEnergy& branch = action == Action::kLocal ? local : offload;
  return branch.latency + psi_weight * branch.energy;
}

double OverallCost(double exec_cost, int64_t arrived, int64_t dropped) {
  if (dropped < 0 || dropped > arrived) {
    throw Error(ErrorCode::kInvalidConfig,
                "dropped count outside [0, arrived]");
  }
  if (arrived == 0) return exec_cost;
  if (dropped == arrived) {
    throw Error(ErrorCode::kAllDropped,
                "all " + std::to_string(arrived) + " arrived tasks dropped");
  }
  const double drop_rate =
      static_cast<double>(dropped) / static_cast<double>(arrived);
  return exec_cost / (1.0 - drop_rate);
}

StepOutcome Step(const EnvConfig& cfg, EnvState& state, Action action,
                 Rng& rng) {
  if (action == Action::kOffload && state.FreeChannels() == 0) {
    throw Error(ErrorCode::kIllegalAction,
                "offload requested with no free channel at slot " +
                    std::to_string(state.slot));
  }
  StepOutcome out;

  // (a) arrivals, admitted in order while the TRQ has room.
  const std::vector<TaskSpec> arrivals = SampleArrivals(rng, cfg, state.slot);
  out.info.arrivals = static_cast<int>(arrivals.size());
  double trq_mb = state.TrqMb();
  for (const TaskSpec& t : arrivals) {
    ++state.arrived;
    if (trq_mb + t.size_mb <= cfg.trq_capacity_mb) {
      state.trq.push_back(t);
      trq_mb += t.size_mb;
    } else {
      ++state.dropped;
      ++state.dropped_trq;
      ++out.info.arrivals_dropped;
    }
  }

  // (b) dispatch the head task.
  if (!state.trq.empty()) {
    const TaskSpec head = state.trq.front();
    state.trq.pop_front();
    out.info.dispatched = true;
    out.info.head = head;
    const LatencyEnergy local = LocalCost(state.LcqCycles(), head, cfg);
    const LatencyEnergy offload = OffloadCost(head, cfg);
    const LatencyEnergy& chosen = action == Action::kLocal ? local : offload;
    out.cost.latency = chosen.latency;
    out.cost.energy = chosen.energy;
    out.cost.exec_cost = ExecutionCost(action, local, offload, cfg.psi_weight);
    if (action == Action::kLocal) {
      if (state.LcqMb() + head.size_mb <= cfg.lcq_capacity_mb) {
        state.lcq.push_back({head, head.cycles});
      } else {
        ++state.dropped;
        ++state.dropped_lcq;
        out.info.head_dropped = true;
      }
    } else {
      const int slots = std::max(
          1, static_cast<int>(std::ceil(offload.latency / cfg.slot_seconds)));
      for (int& busy : state.channel_busy_slots) {
        if (busy == 0) {
          busy = slots;
          break;
        }
      }
      ++state.offloaded;
      out.info.channel_slots = slots;
    }
  }

  // (c) FCFS drain; a partially served job carries its remainder over.
  double budget = cfg.edge_freq * cfg.slot_seconds;
  while (budget > 0.0 && !state.lcq.empty()) {
    LocalJob& job = state.lcq.front();
    if (job.remaining_cycles <= budget) {
      budget -= job.remaining_cycles;
      state.lcq.pop_front();
      ++state.completed_local;
    } else {
      job.remaining_cycles -= budget;
      budget = 0.0;
    }
  }

  // (d) channel timers.
  for (int& busy : state.channel_busy_slots) {
    if (busy > 0) --busy;
  }

  // (e) cost and reward.
  out.cost.drop_rate =
      state.arrived == 0 ? 0.0
                         : static_cast<double>(state.dropped) /
                               static_cast<double>(state.arrived);
  if (out.cost.exec_cost == 0.0) {
    out.cost.total_cost = 0.0;
  } else {
    out.cost.total_cost =
        OverallCost(out.cost.exec_cost, state.arrived, state.dropped);
  }
  out.reward = out.cost.total_cost == 0.0 ? 0.0 : -out.cost.total_cost;
  ++state.slot;
  return out;
}

Observation Observe(const EnvState& state, const EnvConfig& cfg) {
  return {state.TrqMb() / cfg.trq_capacity_mb,
          state.LcqMb() / cfg.lcq_capacity_mb,
          state.LcqCycles() / cfg.CyclesScale(),
          static_cast<double>(state.FreeChannels()) /
              static_cast<double>(cfg.n_channels)};
}

OffloadingEnv::OffloadingEnv(const EnvConfig& cfg, Rng rng)
    : cfg_(cfg), state_(EnvState::Initial(cfg)), rng_(std::move(rng)) {
  cfg_.Validate();
}

}  // namespace edgeq
