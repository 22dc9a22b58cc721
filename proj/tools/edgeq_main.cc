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

// edgeq: run experiment sweeps, account privacy budgets, build plot tables.
//
//   edgeq run spec.json
//   edgeq account --epsilon 0.5 --delta 1e-5 --z 1 --steps 40000 [--json]
//   edgeq plot-data results/summary.csv [--episodes ...] [--out ...]

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "edgeq/errors.h"
#include "edgeq/experiment.h"
#include "edgeq/privacy.h"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

int ExitCodeFor(const edgeq::Error& e) {
  switch (e.code()) {
    case edgeq::ErrorCode::kInvalidConfig:
    case edgeq::ErrorCode::kBudgetOutOfRange:
    case edgeq::ErrorCode::kSchemaMismatch:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

int RunCommand(const std::string& spec_path) {
  edgeq::ExperimentSpec spec = edgeq::LoadExperimentSpec(spec_path);
  if (const char* s = std::getenv("EDGEQ_SEED"); s != nullptr && *s != '\0') {
    char* end = nullptr;
    const unsigned long long seed = std::strtoull(s, &end, 10);
    if (*end != '\0' || *s == '-') {
      throw edgeq::Error(edgeq::ErrorCode::kInvalidConfig,
                         std::string("EDGEQ_SEED is not a seed: ") + s);
    }
    spec.seeds = {static_cast<uint64_t>(seed)};
  }
  const auto cells = edgeq::EnumerateCells(spec);
  std::cerr << "edgeq: " << cells.size() << " cells, config "
            << edgeq::ConfigHash(spec) << '\n';
  const edgeq::ExperimentOutputs out = edgeq::RunExperiment(spec);
  std::cout << out.episodes_csv.string() << '\n'
            << out.summary_csv.string() << '\n'
            << out.metadata_json.string() << '\n';
  return kExitOk;
}

struct AccountFlags {
  edgeq::AccountantInputs in;
  std::optional<double> sigma;
  bool json_only = false;
};

int AccountCommand(const AccountFlags& flags) {
  edgeq::AccountantInputs in = flags.in;
  // Without --sigma, report the bounds at the smallest sufficient sigma.
  in.sigma = flags.sigma ? *flags.sigma : edgeq::MinSigma(in);
  const edgeq::PrivacyReport r = edgeq::Account(in);
  const nlohmann::json j = {
      {"epsilon", in.epsilon},
      {"delta", in.delta},
      {"alpha", in.alpha},
      {"z", in.z},
      {"batch", in.batch},
      {"lipschitz", in.lipschitz},
      {"sensitivity", in.sensitivity},
      {"steps", in.total_steps},
      {"sigma", in.sigma},
      {"states", in.state_count},
      {"gamma", in.gamma},
      {"psi", r.psi},
      {"j_factor", r.j_factor},
      {"sigma_min", r.sigma_min},
      {"sigma_per_update", r.sigma_per_update},
      {"delta_effective", r.delta_effective},
      {"z_condition_met", r.z_condition_met},
      {"rkhs_bound", r.rkhs_bound},
      {"utility_bound", r.utility_bound},
      {"sigma_sufficient", r.sigma_sufficient}};
  if (!flags.json_only) {
    std::printf("noise scale Psi        %.6g\n", r.psi);
    std::printf("J (RKHS norm bound)    %.6g\n", r.j_factor);
    std::printf("sigma_min              %.6g\n", r.sigma_min);
    std::printf("sigma per update       %.6g\n", r.sigma_per_update);
    std::printf("sigma used             %.6g\n", in.sigma);
    std::printf("effective delta        %.6g\n", r.delta_effective);
    std::printf("z condition            %s\n", r.z_condition_met ? "met" : "NOT met");
    std::printf("utility bound          %.6g\n", r.utility_bound);
    std::printf("sigma sufficient       %s\n", r.sigma_sufficient ? "yes" : "no");
  }
  std::cout << j.dump() << std::endl;
  return kExitOk;
}

int PlotDataCommand(const std::string& summary, std::string episodes,
                    const std::string& out_path) {
  if (episodes.empty()) {
    episodes = (std::filesystem::path(summary).parent_path() / "episodes.csv")
                   .string();
  }
  if (out_path.empty() || out_path == "-") {
    edgeq::WritePlotData(summary, episodes, std::cout);
    return kExitOk;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  edgeq::WritePlotData(summary, episodes, out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edgeq: private deep Q-learning for edge computation offloading"};
  app.require_subcommand(1);

  std::string spec_path;
  auto* run = app.add_subcommand("run", "Run an experiment sweep from a JSON spec");
  run->add_option("spec", spec_path, "Experiment spec (JSON)")->required();

  AccountFlags acct;
  auto* account = app.add_subcommand("account", "Print a privacy/utility report");
  account->add_option("--epsilon", acct.in.epsilon, "Privacy budget, 0 < eps < 1")
      ->capture_default_str();
  account->add_option("--delta", acct.in.delta, "Failure probability")
      ->capture_default_str();
  account->add_option("--alpha", acct.in.alpha, "Learning rate")
      ->capture_default_str();
  account->add_option("--z", acct.in.z, "Balance factor")->required();
  account->add_option("--batch", acct.in.batch, "Minibatch size")
      ->capture_default_str();
  account->add_option("--lipschitz", acct.in.lipschitz, "Lipschitz constant D")
      ->capture_default_str();
  account->add_option("--sensitivity", acct.in.sensitivity, "Reward sensitivity")
      ->capture_default_str();
  account->add_option("--steps", acct.in.total_steps,
                      "Parameter updates over training")
      ->capture_default_str();
  account->add_option("--sigma", acct.sigma, "Noise level used (default sigma_min)");
  account->add_option("--states", acct.in.state_count, "Number of states n")
      ->capture_default_str();
  account->add_option("--gamma", acct.in.gamma, "Discount factor")
      ->capture_default_str();
  account->add_flag("--json", acct.json_only, "Emit only the JSON object");

  std::string summary_path, episodes_path, out_path;
  auto* plot = app.add_subcommand("plot-data", "Long-format plotting table");
  plot->add_option("summary", summary_path, "summary.csv from a run")->required();
  plot->add_option("--episodes", episodes_path,
                   "episodes.csv (default: next to the summary)");
  plot->add_option("--out", out_path, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return RunCommand(spec_path);
    if (*account) return AccountCommand(acct);
    if (*plot) return PlotDataCommand(summary_path, episodes_path, out_path);
  } catch (const edgeq::Error& e) {
    std::cerr << "edgeq: " << e.what() << '\n';
    return ExitCodeFor(e);
  } catch (const std::exception& e) {
    std::cerr << "edgeq: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
