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

#include "edgeq/agent.h"

#include <chrono>
#include <cmath>
#include <string>

#include "edgeq/errors.h"

namespace edgeq {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Action ForceFeasible(Action a, const EnvState& state) {
  return state.FreeChannels() == 0 ? Action::kLocal : a;
}

TrainResult TrainLoop(const EnvConfig& env_cfg, const TrainConfig& cfg,
                      bool noisy, const StepObserver& observer) {
  env_cfg.Validate();
  cfg.Validate();
  const FgpmConfig fgpm = cfg.Fgpm();
  Rng agent_rng = MakeStream(cfg.seed, "agent");
  Rng noise_rng = MakeStream(cfg.seed, "noise");
  OffloadingEnv env(env_cfg, MakeStream(cfg.seed, "env"));

  Mlp online = Mlp::GlorotUniform(kQNetworkTopology, agent_rng);
  Mlp target = online;
  ReplayBuffer replay(static_cast<size_t>(cfg.replay_capacity));
  NoiseStore store;

  const auto batch_size = static_cast<size_t>(cfg.batch);
  std::vector<TdSample> batch(batch_size);
  std::vector<std::array<double, kNumActions>> next_noise(batch_size);
  Eigen::MatrixXd next_states(4, cfg.batch);

  TrainResult result{online, {}};
  result.logs.reserve(static_cast<size_t>(cfg.episodes));

  for (int episode = 1; episode <= cfg.episodes; ++episode) {
    const auto started = Clock::now();
    env.Reset();
    if (noisy && !cfg.persistent_noise_store) store.Reset();
    const bool store_empty = store.Empty();
    const bool training = episode > cfg.warmup_episodes;

    EpisodeLog log;
    log.episode = episode;
    double discount = 1.0;
    double loss_sum = 0.0;
    Observation obs = env.Observe();

    for (int t = 0; t < env_cfg.horizon; ++t) {
      const QValues q = Forward(online, obs);
      const Action action = ForceFeasible(
          EpsilonGreedy(q, cfg.epsilon, agent_rng), env.state());
      const int free_channels = env.state().FreeChannels();
      const StepOutcome out = env.Step(action);
      const Observation next = env.Observe();
      if (observer) {
        observer({episode, t, obs, free_channels, action, out.reward,
                  store_empty});
      }
      log.return_undisc += out.reward;
      log.return_disc += discount * out.reward;
      discount *= cfg.gamma;
      replay.Push({obs, action, out.reward, next});

      if (training) {
        const std::vector<size_t> idx =
            replay.SampleIndices(batch_size, agent_rng);
        for (size_t i = 0; i < batch_size; ++i) {
          const Transition& tr = replay.Slot(idx[i]);
          batch[i].state = tr.state;
          batch[i].action = tr.action;
          if (noisy) {
            next_noise[i] = store.InsertAndSample(tr.action, tr.reward,
                                                  tr.next_state, fgpm, noise_rng);
            batch[i].noise = store.InsertAndSample(tr.action, tr.reward,
                                                   tr.state, fgpm,
                                                   noise_rng)[ToIndex(tr.action)];
          } else {
            next_noise[i] = {0.0, 0.0};
            batch[i].noise = 0.0;
          }
          for (int k = 0; k < 4; ++k) {
            next_states(k, static_cast<Eigen::Index>(i)) =
                tr.next_state[static_cast<size_t>(k)];
          }
        }
        const Eigen::MatrixXd target_q = target.Forward(next_states);
        for (size_t i = 0; i < batch_size; ++i) {
          const auto col = static_cast<Eigen::Index>(i);
          batch[i].target = TdTarget(replay.Slot(idx[i]).reward,
                                     {target_q(0, col), target_q(1, col)},
                                     next_noise[i], cfg.gamma);
        }
        loss_sum += GradAndStep(online, batch, cfg.alpha, cfg.grad_clip);
        ++log.updates;
      }
      obs = next;
    }

    if (training && episode % cfg.target_sync == 0) target = online;
    log.drops = env.state().dropped;
    log.mean_loss = log.updates > 0 ? loss_sum / log.updates : 0.0;
    log.wall_seconds = SecondsSince(started);
    result.logs.push_back(log);
  }
  result.network = std::move(online);
  return result;
}

}  // namespace

void TrainConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidConfig, what);
  };
  require(episodes >= 1, "episodes must be >= 1");
  require(warmup_episodes >= 0 && warmup_episodes <= episodes,
          "need 0 <= warmup_episodes <= episodes");
  require(batch >= 1, "batch must be >= 1");
  require(target_sync >= 1, "target_sync must be >= 1");
  require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must be in [0, 1]");
  require(alpha > 0.0, "alpha must be > 0");
  require(gamma >= 0.0 && gamma < 1.0, "gamma must be in [0, 1)");
  require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be >= 0");
  require(z >= 0.0, "z must be >= 0");
  require(replay_capacity >= 1, "replay_capacity must be >= 1");
  require(!grad_clip || *grad_clip > 0.0, "grad_clip must be > 0");
}

FgpmConfig TrainConfig::Fgpm() const {
  FgpmConfig f;
  f.sigma = sigma;
  f.alpha = alpha;
  f.z = z;
  f.batch = batch;
  f.exact_ou_variance = exact_ou_variance;
  return f;
}

TrainResult TrainDpDqo(const EnvConfig& env, const TrainConfig& cfg,
                       const StepObserver& observer) {
  return TrainLoop(env, cfg, /*noisy=*/true, observer);
}

TrainResult TrainDqnBaseline(const EnvConfig& env, const TrainConfig& cfg,
                             const StepObserver& observer) {
  return TrainLoop(env, cfg, /*noisy=*/false, observer);
}

Action GreedyAction(const EnvState& state, const EnvConfig& cfg) {
  if (state.trq.empty() || state.FreeChannels() == 0) return Action::kLocal;
  const TaskSpec& head = state.trq.front();
  if (state.LcqMb() + head.size_mb > cfg.lcq_capacity_mb) {
    return Action::kOffload;
  }
  const LatencyEnergy local = LocalCost(state.LcqCycles(), head, cfg);
  const LatencyEnergy offload = OffloadCost(head, cfg);
  const double c_local =
      ExecutionCost(Action::kLocal, local, offload, cfg.psi_weight);
  const double c_offload =
      ExecutionCost(Action::kOffload, local, offload, cfg.psi_weight);
  return c_offload < c_local ? Action::kOffload : Action::kLocal;
}

namespace {

EpisodeLog RollOut(OffloadingEnv& env, const Policy& policy, double gamma,
                   int episode) {
  const auto started = Clock::now();
  env.Reset();
  EpisodeLog log;
  log.episode = episode;
  double discount = 1.0;
  for (int t = 0; t < env.config().horizon; ++t) {
    const Action a = ForceFeasible(policy(env.state()), env.state());
    const StepOutcome out = env.Step(a);
    log.return_undisc += out.reward;
    log.return_disc += discount * out.reward;
    discount *= gamma;
  }
  log.drops = env.state().dropped;
  log.wall_seconds = SecondsSince(started);
  return log;
}

}  // namespace

std::vector<EpisodeLog> RunGreedy(const EnvConfig& env_cfg, int episodes,
                                  uint64_t seed, double gamma) {
  OffloadingEnv env(env_cfg, MakeStream(seed, "env"));
  const Policy greedy = [&env_cfg](const EnvState& s) {
    return GreedyAction(s, env_cfg);
  };
  std::vector<EpisodeLog> logs;
  for (int e = 1; e <= episodes; ++e) {
    logs.push_back(RollOut(env, greedy, gamma, e));
  }
  return logs;
}

Policy QNetworkPolicy(const Mlp& net, const EnvConfig& cfg) {
  return [net, cfg](const EnvState& s) {
    return ForceFeasible(Argmax(Forward(net, Observe(s, cfg))), s);
  };
}

PolicyEvaluation EvaluatePolicy(const Policy& policy, const EnvConfig& env_cfg,
                                int episodes, uint64_t seed, double gamma) {
  if (episodes < 1) {
    throw Error(ErrorCode::kInvalidConfig, "need at least one episode");
  }
  OffloadingEnv env(env_cfg, MakeStream(seed, "eval"));
  PolicyEvaluation ev;
  for (int e = 1; e <= episodes; ++e) {
    ev.returns.push_back(RollOut(env, policy, gamma, e).return_disc);
  }
  double sum = 0.0;
  for (double r : ev.returns) sum += r;
  ev.mean = sum / episodes;
  if (episodes > 1) {
    double ss = 0.0;
    for (double r : ev.returns) ss += (r - ev.mean) * (r - ev.mean);
    ev.std_error = std::sqrt(ss / (episodes - 1)) / std::sqrt(double(episodes));
  }
  return ev;
}

}  // namespace edgeq
