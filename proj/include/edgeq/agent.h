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

// Training loops for DP-DQO and the DQN baseline, the greedy baseline, and
// frozen-policy evaluation.

#ifndef EDGEQ_AGENT_H_
#define EDGEQ_AGENT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "edgeq/env.h"
#include "edgeq/fgpm.h"
#include "edgeq/qnet.h"

namespace edgeq {

struct TrainConfig {
  int episodes = 300;        // Gamma
  int warmup_episodes = 20;  // Gamma_eps
  int batch = 64;            // Omega
  int target_sync = 10;      // Gamma_0, in episodes
  double epsilon = 0.02;
  double alpha = 0.002;
  double gamma = 0.98;
  double sigma = 0.0;
  double z = 1.0;
  uint64_t seed = 0;
  int replay_capacity = 2000;
  std::optional<double> grad_clip;      // off unless set
  bool persistent_noise_store = false;  // ablation: skip per-episode reset
  bool exact_ou_variance = false;

  void Validate() const;
  FgpmConfig Fgpm() const;
};

struct EpisodeLog {
  int episode = 0;  // 1-based
  double return_undisc = 0.0;
  double return_disc = 0.0;
  int64_t drops = 0;
  double mean_loss = 0.0;  // 0 when no update happened
  int updates = 0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  Mlp network;
  std::vector<EpisodeLog> logs;
};

// Per-slot instrumentation hook.
struct StepRecord {
  int episode = 0;
  int slot = 0;
  Observation observation{};
  int free_channels = 0;
  Action action = Action::kLocal;
  double reward = 0.0;
  bool noise_store_empty_at_episode_start = true;
};
using StepObserver = std::function<void(const StepRecord&)>;

// DP-DQO training. Streams derived from cfg.seed: "env" for arrivals, "agent" for
// initialization, exploration and minibatches, "noise" for the FGPM.
TrainResult TrainDpDqo(const EnvConfig& env, const TrainConfig& cfg,
                       const StepObserver& observer = {});

// Same loop with every noise term identically zero and no noise store.
TrainResult TrainDqnBaseline(const EnvConfig& env, const TrainConfig& cfg,
                             const StepObserver& observer = {});

// Minimizes the immediate execution cost of the head task. Forced local when
// no channel is free; switches to offload when the LCQ would overflow and a
// channel is free; ties go local.
Action GreedyAction(const EnvState& state, const EnvConfig& cfg);

// Runs the greedy policy for `episodes` episodes on the "env" stream of
// `seed`, logging returns the same way training does.
std::vector<EpisodeLog> RunGreedy(const EnvConfig& env, int episodes,
                                  uint64_t seed, double gamma);

using Policy = std::function<Action(const EnvState&)>;

// Greedy action of a frozen Q-network, forced local when no channel is free.
Policy QNetworkPolicy(const Mlp& net, const EnvConfig& cfg);

struct PolicyEvaluation {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> returns;  // discounted, one per episode
};

PolicyEvaluation EvaluatePolicy(const Policy& policy, const EnvConfig& env,
                                int episodes, uint64_t seed,
                                double gamma = 0.98);

}  // namespace edgeq

#endif  // EDGEQ_AGENT_H_
