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
#include <optional>
#include <string>
#include <vector>

#include "curdisc/partition.hpp"

namespace curdisc {

struct AnnotatedSample {
  SampleId id = 0;
  std::vector<double> features;
  int label = 0;
  // Per-class annotator votes; absent when the source had none.
  std::optional<std::vector<int>> counts;
  // Difficulty estimate in [0, 1]; unset until scored.
  std::optional<double> psi;

  bool operator==(const AnnotatedSample&) const = default;
};

enum class SplitTag { kTrain, kDev, kTest };

std::string ToString(SplitTag tag);

struct Dataset {
  std::vector<AnnotatedSample> samples;
  int num_classes = 2;
  SplitTag split = SplitTag::kTrain;

  std::size_t size() const { return samples.size(); }
  std::size_t dim() const {
    return samples.empty() ? 0 : samples.front().features.size();
  }
  bool has_counts() const;

  // Checks unique ids, C >= 2, labels in range, fixed dimensionality, count
  // vector shapes. Throws Error on the first violation.
  void Validate() const;

  bool operator==(const Dataset&) const = default;
};

enum class DataFormat { kJsonl, kCsv };

DataFormat ParseDataFormat(const std::string& name);

// Reads a dataset. `num_classes` of 0 infers C from the count vectors, or
// from the largest label when no counts are present. Errors carry the
// offending line number.
Dataset LoadDataset(const std::filesystem::path& path, DataFormat format,
                    int num_classes = 0, SplitTag split = SplitTag::kTrain);

// JSONL, one {"id","x","y","counts"} record per line in sample order.
std::string SerializeJsonl(const Dataset& dataset);
void SaveDataset(const Dataset& dataset, const std::filesystem::path& path);

struct SynthesisParams {
  int n = 1500;
  int num_classes = 3;
  int annotators = 5;
  double noise_hard = 0.6;
  std::uint64_t seed = 0;
  // Feature geometry. The first `num_classes` dimensions carry the class
  // signal; the rest are nuisance noise.
  int dim = 24;
  double separation = 2.0;
  // Feature noise standard deviation grows from 1 to 1 + hard_spread as the
  // latent difficulty goes from 0 to 1.
  double hard_spread = 2.0;
};

struct SynthesisResult {
  Dataset train;
  Dataset dev;
  Dataset test;
  // Generator ground truth, keyed by sample id.
  ScoreMap latent_difficulty;
  std::map<SampleId, int> true_label;
};

// Multi-annotator synthetic data with a controllable latent difficulty per
// sample, split 60/20/20 stratified by gold label.
SynthesisResult Synthesize(const SynthesisParams& params);

// Exactly `per_group` samples drawn without replacement from each group of
// `partition`, returned in the original dataset order.
Dataset DifficultyBalancedSubsample(const Dataset& dataset,
                                    const DifficultyPartition& partition,
                                    int per_group, std::uint64_t seed);

// Human-readable summary used by `data inspect`.
std::string DescribeDataset(const Dataset& dataset);

}  // namespace curdisc
