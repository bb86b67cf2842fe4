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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curdisc/baselines.hpp"
#include "curdisc/dataset.hpp"
#include "curdisc/model.hpp"
#include "curdisc/partition.hpp"
#include "curdisc/schedule.hpp"

namespace curdisc {

struct TrainerConfig {
  // Only kind and hidden are read; dimensions come from the data.
  ModelSpec model;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 1e-2;
  int batch_size = 16;
  int epochs = 10;
  std::uint64_t seed = 0;
  // Evaluation cadence as a fraction of an epoch.
  double eval_every = 0.5;
  WeightingStrategy strategy;
  double init_scale = 0.05;

  void Validate() const;
};

struct EvalPoint {
  double t = 0.0;
  // Mean unweighted training loss over the batches since the previous
  // evaluation.
  double train_loss = 0.0;
  double dev_accuracy = 0.0;

  bool operator==(const EvalPoint&) const = default;
};

struct TrainReport {
  std::uint64_t seed = 0;
  double best_dev_accuracy = 0.0;
  // Accuracy of the best-dev checkpoint on the test split.
  double test_accuracy = 0.0;
  int best_eval = -1;
  std::vector<EvalPoint> curve;
  // [group][evaluation] mean weight given to members of each group between
  // consecutive evaluations; NaN when a group saw no samples.
  std::vector<std::vector<double>> group_weight_trajectory;
  DifficultyPartition final_partition;
  // Partition in force after each evaluation.
  std::vector<DifficultyPartition> partition_history;
  // [evaluation][sample] training loss of every training sample, measured
  // with a full pass at each evaluation. Only filled on request.
  std::vector<std::vector<double>> loss_snapshots;
  std::vector<double> best_params;
  std::vector<double> final_params;
};

struct TrainOptions {
  bool record_loss_snapshots = false;
  // Called after every optimizer step with the 1-based step count.
  std::function<void(long, std::span<const double>)> on_step;
};

// Full training run. `dev`, `test` and `partition` may be null: without dev
// data no checkpoint selection happens and the final parameters are kept;
// without a partition group statistics are not tracked. `curriculum` is
// required when cfg.strategy.kind is kCurriculum.
TrainReport Train(const Dataset& train, const Dataset* dev, const Dataset* test,
                  const DifficultyPartition* partition, const TrainerConfig& cfg,
                  const CurriculumConfig* curriculum, const TrainOptions& options = {});

inline TrainReport Train(const Dataset& train, const Dataset& dev, const Dataset& test,
                         const DifficultyPartition& partition, const TrainerConfig& cfg,
                         const CurriculumConfig& curriculum) {
  return Train(train, &dev, &test, &partition, cfg, &curriculum);
}

double Accuracy(const ModelSpec& spec, std::span<const double> params, const Dataset& data);

// Model spec with the dimensions of `data` filled in.
ModelSpec ResolveModel(const ModelSpec& model, const Dataset& data);

std::string ReportToJson(const TrainReport& report);
TrainReport ReportFromJson(const std::string& text);
// Hex SHA-1 of the canonical JSON of the report.
std::string ReportDigest(const TrainReport& report);

// Header `eval,t,train_loss,dev_accuracy`.
std::string CurveCsv(const TrainReport& report);
// Header `eval,group0,...`.
std::string GroupWeightCsv(const TrainReport& report);

}  // namespace curdisc
