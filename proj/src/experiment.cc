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

#include "edgeq/experiment.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>
#include <utility>

#include <Eigen/Core>

#include "edgeq/errors.h"
#include "edgeq/random.h"

namespace edgeq {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

void Invalid(const std::string& msg) {
  throw Error(ErrorCode::kInvalidConfig, msg);
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

template <typename T>
using Setter = std::function<void(T&, const json&)>;

template <typename T>
void ApplyObject(T& target, const json& j, const std::string& where,
                 const std::map<std::string, Setter<T>>& setters) {
  if (!j.is_object()) Invalid("\"" + where + "\" must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) Invalid("unknown key \"" + where + "." + key + "\"");
    try {
      it->second(target, value);
    } catch (const json::exception& e) {
      Invalid("bad value for \"" + where + "." + key + "\": " + e.what());
    }
  }
}

#define EDGEQ_FIELD(Type, name) \
  {#name, [](Type& t, const json& v) { v.get_to(t.name); }}

const std::map<std::string, Setter<EnvConfig>>& EnvSetters() {
  static const std::map<std::string, Setter<EnvConfig>> setters = {
      EDGEQ_FIELD(EnvConfig, n_devices),
      EDGEQ_FIELD(EnvConfig, slot_seconds),
      EDGEQ_FIELD(EnvConfig, trq_capacity_mb),
      EDGEQ_FIELD(EnvConfig, lcq_capacity_mb),
      EDGEQ_FIELD(EnvConfig, edge_freq),
      EDGEQ_FIELD(EnvConfig, kappa1),
      EDGEQ_FIELD(EnvConfig, tx_rate),
      EDGEQ_FIELD(EnvConfig, tx_power),
      EDGEQ_FIELD(EnvConfig, n_channels),
      EDGEQ_FIELD(EnvConfig, psi_weight),
      EDGEQ_FIELD(EnvConfig, horizon),
      EDGEQ_FIELD(EnvConfig, size_min),
      EDGEQ_FIELD(EnvConfig, size_max),
      EDGEQ_FIELD(EnvConfig, cycles_min),
      EDGEQ_FIELD(EnvConfig, cycles_max),
  };
  return setters;
}

const std::map<std::string, Setter<TrainConfig>>& TrainSetters() {
  static const std::map<std::string, Setter<TrainConfig>> setters = {
      EDGEQ_FIELD(TrainConfig, episodes),
      EDGEQ_FIELD(TrainConfig, warmup_episodes),
      EDGEQ_FIELD(TrainConfig, batch),
      EDGEQ_FIELD(TrainConfig, target_sync),
      EDGEQ_FIELD(TrainConfig, epsilon),
      EDGEQ_FIELD(TrainConfig, alpha),
      EDGEQ_FIELD(TrainConfig, gamma),
      EDGEQ_FIELD(TrainConfig, z),
      EDGEQ_FIELD(TrainConfig, replay_capacity),
      EDGEQ_FIELD(TrainConfig, persistent_noise_store),
      EDGEQ_FIELD(TrainConfig, exact_ou_variance),
      {"grad_clip",
       [](TrainConfig& t, const json& v) {
         if (v.is_null()) {
           t.grad_clip.reset();
         } else {
           t.grad_clip = v.get<double>();
         }
       }},
  };
  return setters;
}

#undef EDGEQ_FIELD

json EnvToJson(const EnvConfig& e) {
  return {{"n_devices", e.n_devices},
          {"slot_seconds", e.slot_seconds},
          {"trq_capacity_mb", e.trq_capacity_mb},
          {"lcq_capacity_mb", e.lcq_capacity_mb},
          {"edge_freq", e.edge_freq},
          {"kappa1", e.kappa1},
          {"tx_rate", e.tx_rate},
          {"tx_power", e.tx_power},
          {"n_channels", e.n_channels},
          {"psi_weight", e.psi_weight},
          {"horizon", e.horizon},
          {"size_min", e.size_min},
          {"size_max", e.size_max},
          {"cycles_min", e.cycles_min},
          {"cycles_max", e.cycles_max}};
}

json TrainToJson(const TrainConfig& t) {
  return {{"episodes", t.episodes},
          {"warmup_episodes", t.warmup_episodes},
          {"batch", t.batch},
          {"target_sync", t.target_sync},
          {"epsilon", t.epsilon},
          {"alpha", t.alpha},
          {"gamma", t.gamma},
          {"z", t.z},
          {"replay_capacity", t.replay_capacity},
          {"grad_clip", t.grad_clip ? json(*t.grad_clip) : json(nullptr)},
          {"persistent_noise_store", t.persistent_noise_store},
          {"exact_ou_variance", t.exact_ou_variance}};
}

template <typename T>
std::vector<T> NonEmptyList(const json& v, const char* key) {
  if (!v.is_array() || v.empty()) {
    Invalid(std::string("\"") + key + "\" must be a non-empty array");
  }
  try {
    return v.get<std::vector<T>>();
  } catch (const json::exception& e) {
    Invalid(std::string("bad element in \"") + key + "\": " + e.what());
  }
  return {};
}

struct FinalStats {
  double return_disc = 0.0;
  double return_undisc = 0.0;
  double drops = 0.0;
  double mean_loss = 0.0;
  int window = 0;
};

FinalStats Summarize(const std::vector<EpisodeLog>& logs, int window) {
  FinalStats s;
  s.window = std::min<int>(window, static_cast<int>(logs.size()));
  if (s.window == 0) return s;
  for (size_t i = logs.size() - static_cast<size_t>(s.window); i < logs.size(); ++i) {
    s.return_disc += logs[i].return_disc;
    s.return_undisc += logs[i].return_undisc;
    s.drops += static_cast<double>(logs[i].drops);
    s.mean_loss += logs[i].mean_loss;
  }
  s.return_disc /= s.window;
  s.return_undisc /= s.window;
  s.drops /= s.window;
  s.mean_loss /= s.window;
  return s;
}

std::ofstream OpenForWrite(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

// Reads a CSV whose header must equal `header`; returns the data rows.
std::vector<std::vector<std::string>> ReadCsv(const fs::path& path,
                                              const std::string& header) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kSchemaMismatch, "cannot read " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw Error(ErrorCode::kSchemaMismatch,
                path.string() + ": unexpected header (want \"" + header + "\")");
  }
  const size_t width = SplitCsvLine(header).size();
  std::vector<std::vector<std::string>> rows;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = SplitCsvLine(line);
    if (fields.size() != width) {
      throw Error(ErrorCode::kSchemaMismatch,
                  path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(width) + " fields");
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

double ParseNumber(const std::string& s, const fs::path& path) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kSchemaMismatch,
                path.string() + ": not a number: \"" + s + "\"");
  }
}

struct Aggregate {
  double sum = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  int count = 0;

  void Add(double v) {
    sum += v;
    min = std::min(min, v);
    max = std::max(max, v);
    ++count;
  }
  double Mean() const { return std::clamp(sum / count, min, max); }
};

}  // namespace

const char* AlgorithmName(Algorithm a) {
  switch (a) {
    case Algorithm::kDpDqo:
      return "dpdqo";
    case Algorithm::kDqn:
      return "dqn";
    case Algorithm::kGreedy:
      return "greedy";
  }
  return "unknown";
}

Algorithm ParseAlgorithm(const std::string& name) {
  if (name == "dpdqo") return Algorithm::kDpDqo;
  if (name == "dqn") return Algorithm::kDqn;
  if (name == "greedy") return Algorithm::kGreedy;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown algorithm \"" + name + "\" (dpdqo, dqn, greedy)");
}

void ExperimentSpec::Validate() const {
  env.Validate();
  TrainConfig t = train;
  t.Validate();
  if (algorithms.empty()) Invalid("algorithms must be non-empty");
  if (seeds.empty()) Invalid("seeds must be non-empty");
  if (arrival_rates.empty()) Invalid("arrival_rates must be non-empty");
  if (sigmas.empty()) Invalid("sigmas must be non-empty");
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) Invalid("sigmas must be >= 0");
  }
  for (double r : arrival_rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) Invalid("arrival_rates must be >= 0");
  }
  if (final_window < 1) Invalid("final_window must be >= 1");
  if (threads < 0) Invalid("threads must be >= 0");
}

ExperimentSpec ParseExperimentSpec(const json& j) {
  ExperimentSpec spec;
  if (!j.is_object()) Invalid("spec must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "env") {
        ApplyObject(spec.env, value, "env", EnvSetters());
      } else if (key == "train") {
        ApplyObject(spec.train, value, "train", TrainSetters());
      } else if (key == "algorithms") {
        spec.algorithms.clear();
        for (const auto& name : NonEmptyList<std::string>(value, "algorithms")) {
          spec.algorithms.push_back(ParseAlgorithm(name));
        }
      } else if (key == "sigmas") {
        spec.sigmas = NonEmptyList<double>(value, "sigmas");
      } else if (key == "arrival_rates") {
        spec.arrival_rates = NonEmptyList<double>(value, "arrival_rates");
      } else if (key == "seeds") {
        spec.seeds = NonEmptyList<uint64_t>(value, "seeds");
      } else if (key == "output_dir") {
        spec.output_dir = value.get<std::string>();
      } else if (key == "final_window") {
        spec.final_window = value.get<int>();
      } else if (key == "save_checkpoints") {
        spec.save_checkpoints = value.get<bool>();
      } else if (key == "threads") {
        spec.threads = value.get<int>();
      } else {
        Invalid("unknown key \"" + key + "\"");
      }
    } catch (const json::exception& e) {
      Invalid("bad value for \"" + key + "\": " + e.what());
    }
  }
  spec.Validate();
  return spec;
}

ExperimentSpec LoadExperimentSpec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) Invalid("cannot open spec file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    Invalid("malformed JSON in " + path.string() + ": " + e.what());
  }
  return ParseExperimentSpec(j);
}

json SpecToJson(const ExperimentSpec& spec) {
  json algos = json::array();
  for (Algorithm a : spec.algorithms) algos.push_back(AlgorithmName(a));
  return {{"env", EnvToJson(spec.env)},
          {"train", TrainToJson(spec.train)},
          {"algorithms", algos},
          {"sigmas", spec.sigmas},
          {"arrival_rates", spec.arrival_rates},
          {"seeds", spec.seeds},
          {"final_window", spec.final_window},
          {"save_checkpoints", spec.save_checkpoints}};
}

std::string ConfigHash(const ExperimentSpec& spec) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(SpecToJson(spec).dump())));
  return buf;
}

std::vector<CellKey> EnumerateCells(const ExperimentSpec& spec) {
  std::vector<CellKey> cells;
  for (double rate : spec.arrival_rates) {
    for (uint64_t seed : spec.seeds) {
      for (Algorithm a : spec.algorithms) {
        if (a == Algorithm::kDpDqo) {
          for (double sigma : spec.sigmas) cells.push_back({a, sigma, rate, seed});
        } else {
          cells.push_back({a, 0.0, rate, seed});
        }
      }
    }
  }
  return cells;
}

uint64_t CellSeed(uint64_t seed, double arrival_rate) {
  return MixSeed(seed, std::bit_cast<uint64_t>(arrival_rate));
}

std::string SeriesLabel(Algorithm a, double sigma) {
  if (a == Algorithm::kDpDqo) {
    return std::string(AlgorithmName(a)) + "(sigma=" + Num(sigma) + ")";
  }
  return AlgorithmName(a);
}

CellResult RunCell(const ExperimentSpec& spec, const CellKey& key) {
  const auto started = std::chrono::steady_clock::now();
  EnvConfig env = spec.env;
  env.arrival_rate = key.arrival_rate;
  TrainConfig train = spec.train;
  train.seed = CellSeed(key.seed, key.arrival_rate);
  train.sigma = key.sigma;

  CellResult result{key, {}, Mlp(kQNetworkTopology), 0.0};
  switch (key.algorithm) {
    case Algorithm::kGreedy:
      result.logs = RunGreedy(env, train.episodes, train.seed, train.gamma);
      break;
    case Algorithm::kDqn: {
      TrainResult r = TrainDqnBaseline(env, train);
      result.logs = std::move(r.logs);
      result.network = std::move(r.network);
      break;
    }
    case Algorithm::kDpDqo: {
      TrainResult r = TrainDpDqo(env, train);
      result.logs = std::move(r.logs);
      result.network = std::move(r.network);
      break;
    }
  }
  result.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - started)
                            .count();
  return result;
}

ExperimentOutputs RunExperiment(const ExperimentSpec& spec) {
  spec.Validate();
  const auto started = std::chrono::steady_clock::now();
  const std::string hash = ConfigHash(spec);
  const std::vector<CellKey> keys = EnumerateCells(spec);

  ExperimentOutputs outputs;
  std::error_code ec;
  fs::create_directories(spec.output_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " +
                             spec.output_dir.string() + ": " + ec.message());
  }
  outputs.episodes_csv = spec.output_dir / "episodes.csv";
  outputs.summary_csv = spec.output_dir / "summary.csv";
  outputs.metadata_json = spec.output_dir / "metadata.json";
  // Fail on an unwritable directory before spending time on training.
  OpenForWrite(outputs.metadata_json);

  outputs.cells.resize(keys.size());
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (size_t i = next++; i < keys.size(); i = next++) {
      try {
        outputs.cells[i] = RunCell(spec, keys[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = keys.size();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const size_t n_threads = std::min<size_t>(
      keys.size(), spec.threads > 0 ? static_cast<size_t>(spec.threads) : hw);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  // Single writer, cell order.
  {
    std::ofstream ep = OpenForWrite(outputs.episodes_csv);
    std::ofstream sm = OpenForWrite(outputs.summary_csv);
    ep << kEpisodeCsvHeader << '\n';
    sm << kSummaryCsvHeader << '\n';
    for (const CellResult& c : outputs.cells) {
      const std::string prefix = std::string(AlgorithmName(c.key.algorithm)) +
                                 "," + Num(c.key.sigma) + "," +
                                 Num(c.key.arrival_rate) + "," +
                                 std::to_string(c.key.seed) + ",";
      for (const EpisodeLog& log : c.logs) {
        ep << prefix << log.episode << ',' << Num(log.return_disc) << ','
           << Num(log.return_undisc) << ',' << log.drops << ','
           << Num(log.mean_loss) << ',' << hash << ','
           << Num(log.wall_seconds) << '\n';
      }
      const FinalStats s = Summarize(c.logs, spec.final_window);
      sm << prefix << c.logs.size() << ',' << s.window << ','
         << Num(s.return_disc) << ',' << Num(s.return_undisc) << ','
         << Num(s.drops) << ',' << Num(s.mean_loss) << ',' << hash << ','
         << Num(c.wall_seconds) << '\n';
    }
    if (!ep || !sm) throw std::runtime_error("failed writing CSV output");
  }

  if (spec.save_checkpoints) {
    const fs::path dir = spec.output_dir / "checkpoints";
    fs::create_directories(dir, ec);
    for (const CellResult& c : outputs.cells) {
      if (c.key.algorithm == Algorithm::kGreedy) continue;
      std::ofstream out = OpenForWrite(
          dir / (std::string(AlgorithmName(c.key.algorithm)) + "_sigma" +
                 Num(c.key.sigma) + "_rate" + Num(c.key.arrival_rate) +
                 "_seed" + std::to_string(c.key.seed) + ".txt"));
      SaveCheckpoint(c.network, out);
    }
  }

  json cells = json::array();
  for (const CellResult& c : outputs.cells) {
    cells.push_back({{"algorithm", AlgorithmName(c.key.algorithm)},
                     {"sigma", c.key.sigma},
                     {"arrival_rate", c.key.arrival_rate},
                     {"seed", c.key.seed},
                     {"cell_seed", CellSeed(c.key.seed, c.key.arrival_rate)},
                     {"wall_time_s", c.wall_seconds}});
  }
  const json meta = {
      {"config_hash", hash},
      {"spec", SpecToJson(spec)},
      {"output_dir", spec.output_dir.string()},
      {"threads", n_threads},
      {"version", kVersion},
      {"compiler", __VERSION__},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"grad_clip_enabled", spec.train.grad_clip.has_value()},
      {"cells", cells},
      {"total_wall_time_s", std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - started)
                                .count()}};
  std::ofstream mo = OpenForWrite(outputs.metadata_json);
  mo << meta.dump(2) << '\n';
  return outputs;
}

void WritePlotData(const fs::path& summary_csv, const fs::path& episodes_csv,
                   std::ostream& out) {
  const auto summary = ReadCsv(summary_csv, kSummaryCsvHeader);
  const auto episodes = ReadCsv(episodes_csv, kEpisodeCsvHeader);

  auto label = [](const std::vector<std::string>& row, const fs::path& path) {
    const Algorithm a = [&] {
      try {
        return ParseAlgorithm(row[0]);
      } catch (const Error&) {
        throw Error(ErrorCode::kSchemaMismatch,
                    path.string() + ": unknown algorithm \"" + row[0] + "\"");
      }
    }();
    return SeriesLabel(a, ParseNumber(row[1], path));
  };

  // (series, rate) -> final returns over seeds.
  std::map<std::tuple<std::string, double>, Aggregate> sweep;
  for (const auto& row : summary) {
    sweep[{label(row, summary_csv), ParseNumber(row[2], summary_csv)}].Add(
        ParseNumber(row[6], summary_csv));
  }
  // (series@rate, episode) -> returns over seeds.
  std::map<std::tuple<std::string, double, int>, Aggregate> curve;
  for (const auto& row : episodes) {
    const double rate = ParseNumber(row[2], episodes_csv);
    const int episode = static_cast<int>(ParseNumber(row[4], episodes_csv));
    curve[{label(row, episodes_csv), rate, episode}].Add(
        ParseNumber(row[5], episodes_csv));
  }

  out << kPlotCsvHeader << '\n';
  for (const auto& [key, agg] : curve) {
    const auto& [series, rate, episode] = key;
    out << "learning_curve," << episode << ',' << series << '@' << Num(rate)
        << ',' << Num(agg.Mean()) << ',' << Num(agg.min) << ','
        << Num(agg.max) << '\n';
  }
  for (const auto& [key, agg] : sweep) {
    const auto& [series, rate] = key;
    out << "arrival_sweep," << Num(rate) << ',' << series << ','
        << Num(agg.Mean()) << ',' << Num(agg.min) << ',' << Num(agg.max)
        << '\n';
  }
}

}  // namespace edgeq
