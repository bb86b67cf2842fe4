// Copyright 2026 The curdisc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "curdisc/dataset.hpp"
#include "curdisc/difficulty.hpp"
#include "curdisc/schedule.hpp"
#include "curdisc/search.hpp"
#include "curdisc/trainer.hpp"

namespace curdisc {

// Flat `key = value` text; `#` starts a comment.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(const std::string& text);
  static KeyValueConfig Load(const std::filesystem::path& path);

  bool Has(const std::string& key) const { return values_.count(key) > 0; }
  std::string Get(const std::string& key, const std::string& fallback) const;
  std::string Require(const std::string& key) const;
  int GetInt(const std::string& key, int fallback) const;
  double GetReal(const std::string& key, double fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;
  std::vector<std::uint64_t> GetSeeds(const std::string& key,
                                      const std::vector<std::uint64_t>& fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::string& text() const { return text_; }

 private:
  std::map<std::string, std::string> values_;
  std::string text_;
};

std::vector<std::uint64_t> ParseSeedList(const std::string& text);

struct DataSplits {
  Dataset train;
  Dataset dev;
  Dataset test;
};

// Reads train.jsonl, dev.jsonl and test.jsonl from `dir`; dev and test take
// the class count of train.
DataSplits LoadDataDir(const std::filesystem::path& dir);
void SaveDataDir(const DataSplits& splits, const std::filesystem::path& dir);

struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path data_dir;
  DifficultyMethod difficulty = DifficultyMethod::kEntropy;
  PartitionMethod partition = PartitionMethod::kQuantile;
  int k = 3;
  // Preset name or path to a curriculum JSON file; used with the curriculum
  // strategy.
  std::string curriculum = "inc";
  bool non_monotonic = false;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  TrainerConfig trainer;
  int threads = 1;

  // Keys: name, data_dir, difficulty, partition, k, strategy, curriculum,
  // non_monotonic, seeds, model, optimizer, lr, batch, epochs, eval_every,
  // lambda, alpha, tau, spl_growth, threads. Relative paths resolve against
  // `base_dir`.
  static ExperimentConfig FromKeyValue(const KeyValueConfig& kv,
                                       const std::filesystem::path& base_dir = {});
};

// Builds the curriculum named by `spec`: a preset name or a JSON path.
CurriculumConfig ResolveCurriculum(const std::string& spec, int k, bool non_monotonic);

struct MeanStderr {
  double mean = 0.0;
  // Sample standard deviation over sqrt(n); 0 for a single value.
  double stderr_ = 0.0;
};
MeanStderr ComputeMeanStderr(const std::vector<double>& values);

struct SummaryRow {
  std::string name;
  std::size_t n = 0;
  MeanStderr dev;
  MeanStderr test;
};

SummaryRow Summarize(const std::string& name, const std::vector<TrainReport>& reports);
// Header `name,n,mean_dev,stderr_dev,mean_test,stderr_test`.
std::string SummaryCsv(const std::vector<SummaryRow>& rows);

// Runs `seeds` training runs in parallel over `threads` workers.
std::vector<TrainReport> TrainSeeds(const DataSplits& data, const DifficultyPartition& partition,
                                    const TrainerConfig& cfg, const CurriculumConfig* curriculum,
                                    const std::vector<std::uint64_t>& seeds, int threads = 1);

struct ExperimentResult {
  std::vector<TrainReport> reports;
  SummaryRow summary;
  std::string summary_csv;
};

// Trains every seed and, when `out_dir` is non-empty, writes the run
// directory:
//   config.txt, seeds.txt, digest.txt, summary.csv,
//   seed_<s>/{report.json, curve.csv, weights.csv, groups.csv}
ExperimentResult RunExperiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                               const std::string& config_text = {});

ExperimentResult RunExperimentFile(const std::filesystem::path& config_path,
                                   const std::filesystem::path& out_dir);

// Recomputes summary.csv from the stored per-seed reports alone.
std::string SummarizeRunDir(const std::filesystem::path& run_dir);

struct SweepRow {
  int k = 0;
  SummaryRow summary;
};

// Trains the inc preset for every k with the partition rebuilt per k.
// Writes k<k>/seed_<s>/report.json and sweep.csv under `out_dir` when
// non-empty.
std::vector<SweepRow> SweepK(const DataSplits& data, DifficultyMethod difficulty,
                             PartitionMethod partition, const std::vector<int>& ks,
                             const TrainerConfig& cfg, const std::vector<std::uint64_t>& seeds,
                             const std::filesystem::path& out_dir = {}, int threads = 1);
// Header `k,n,mean_dev,stderr_dev,mean_test,stderr_test`.
std::string SweepCsv(const std::vector<SweepRow>& rows);
std::string SummarizeSweepDir(const std::filesystem::path& out_dir);

struct TransferTarget {
  std::string name;
  DataSplits data;
  DifficultyPartition partition;
  TrainerConfig trainer;
};

struct NamedCurriculum {
  std::string name;
  CurriculumConfig curriculum;
};

struct TransferResult {
  std::vector<std::string> rows;     // target names
  std::vector<std::string> columns;  // curriculum names
  std::vector<std::vector<double>> raw;         // mean test accuracy
  std::vector<std::vector<double>> normalized;  // each row's max is 100
};

// Scales each row so that its maximum is 100.
std::vector<std::vector<double>> RowNormalize(const std::vector<std::vector<double>>& raw);

TransferResult TransferMatrix(const std::vector<NamedCurriculum>& curricula,
                              const std::vector<TransferTarget>& targets,
                              const std::vector<std::uint64_t>& seeds, int threads = 1);
// Header `target,<curriculum names...>` for the given matrix.
std::string MatrixCsv(const TransferResult& result, bool normalized);

// Keys: curricula = name:path, ...; targets = name:data_dir:model, ...; plus
// k, difficulty, partition, seeds, threads and the trainer keys of
// ExperimentConfig. Writes transfer_raw.csv, transfer_normalized.csv,
// config.txt and digest.txt when `out_dir` is set.
TransferResult RunTransferFile(const std::filesystem::path& config_path,
                               const std::filesystem::path& out_dir);

}  // namespace curdisc
