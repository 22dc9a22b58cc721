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

// Seeded experiment sweeps: JSON spec in, per-episode/summary CSVs and a
// metadata JSON out, plus the long-format plotting table.

#ifndef EDGEQ_EXPERIMENT_H_
#define EDGEQ_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "edgeq/agent.h"
#include "edgeq/env.h"
#include "json.hpp"

namespace edgeq {

enum class Algorithm { kDpDqo, kDqn, kGreedy };

const char* AlgorithmName(Algorithm a);
Algorithm ParseAlgorithm(const std::string& name);

struct ExperimentSpec {
  EnvConfig env;
  TrainConfig train;
  std::vector<Algorithm> algorithms = {Algorithm::kGreedy, Algorithm::kDqn,
                                       Algorithm::kDpDqo};
  std::vector<double> sigmas = {0.1, 0.3, 0.5, 0.7};
  std::vector<double> arrival_rates = {0.2};
  std::vector<uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::filesystem::path output_dir = "results";
  int final_window = 50;  // episodes averaged into the summary
  bool save_checkpoints = false;
  int threads = 0;  // 0 = hardware concurrency

  void Validate() const;
};

// Unknown keys are rejected; missing keys keep the defaults above.
// Throws Error(kInvalidConfig) with the offending key in the message.
ExperimentSpec ParseExperimentSpec(const nlohmann::json& j);
ExperimentSpec LoadExperimentSpec(const std::filesystem::path& path);

// Canonical JSON of everything that affects results (output_dir and threads
// excluded).
nlohmann::json SpecToJson(const ExperimentSpec& spec);
std::string ConfigHash(const ExperimentSpec& spec);

struct CellKey {
  Algorithm algorithm = Algorithm::kGreedy;
  double sigma = 0.0;  // 0 for the noise-free algorithms
  double arrival_rate = 0.0;
  uint64_t seed = 0;
};

// Cartesian product; sigma only multiplies DP-DQO cells. Order: arrival
// rate, seed, algorithm (spec order), sigma.
std::vector<CellKey> EnumerateCells(const ExperimentSpec& spec);

// Seed shared by all algorithms evaluated at (seed, arrival_rate).
uint64_t CellSeed(uint64_t seed, double arrival_rate);

std::string SeriesLabel(Algorithm a, double sigma);

struct CellResult {
  CellKey key;
  std::vector<EpisodeLog> logs;
  Mlp network;
  double wall_seconds = 0.0;
};

CellResult RunCell(const ExperimentSpec& spec, const CellKey& key);

struct ExperimentOutputs {
  std::filesystem::path episodes_csv;
  std::filesystem::path summary_csv;
  std::filesystem::path metadata_json;
  std::vector<CellResult> cells;
};

// Runs every cell (in parallel when threads > 1) and writes
// episodes.csv, summary.csv and metadata.json into spec.output_dir in cell
// order, independent of scheduling.
ExperimentOutputs RunExperiment(const ExperimentSpec& spec);

inline constexpr const char* kEpisodeCsvHeader =
    "algorithm,sigma,arrival_rate,seed,episode,return_disc,return_undisc,"
    "drops,mean_loss,config_hash,wall_time_s";
inline constexpr const char* kSummaryCsvHeader =
    "algorithm,sigma,arrival_rate,seed,episodes,final_window,"
    "final_return_disc,final_return_undisc,final_drops,final_mean_loss,"
    "config_hash,wall_time_s";
inline constexpr const char* kPlotCsvHeader = "figure,x,series,mean,min,max";

// Long-format table: learning_curve rows (x = episode, one series per
// algorithm/sigma/arrival rate) from the episode CSV, and arrival_sweep rows
// (x = arrival rate) from the summary CSV. Aggregates over seeds.
// Throws Error(kSchemaMismatch) if a header does not match.
void WritePlotData(const std::filesystem::path& summary_csv,
                   const std::filesystem::path& episodes_csv,
                   std::ostream& out);

}  // namespace edgeq

#endif  // EDGEQ_EXPERIMENT_H_
