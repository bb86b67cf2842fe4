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
#include <span>
#include <string>

#include "curdisc/dataset.hpp"
#include "curdisc/partition.hpp"
#include "curdisc/trainer.hpp"

namespace curdisc {

// Shannon entropy of the annotator label distribution, normalized by ln(C)
// where C is the length of `counts`. Result in [0, 1].
double EntropyScore(std::span<const int> counts);

// Entropy score of every sample; every sample must carry counts.
ScoreMap EntropyScores(const Dataset& dataset);

// Difficulty from a uniform-weight baseline run: the loss of every training
// sample is recorded at each evaluation boundary (every half epoch by
// default), averaged per sample, then min-max normalized to [0, 1]. When all
// averages coincide every prior is 0.5 and a warning is emitted.
ScoreMap LossPrior(const Dataset& train, const TrainerConfig& cfg);

// Same, also returning the raw snapshot count per sample for inspection.
struct LossPriorResult {
  ScoreMap prior;
  std::size_t snapshots = 0;
};
LossPriorResult LossPriorDetailed(const Dataset& train, const TrainerConfig& cfg);

// Nearest-rank quantile thresholds at i/k; scores equal to a threshold go to
// the lower group.
DifficultyPartition PartitionQuantile(const ScoreMap& scores, int k,
                                      DifficultyMethod method = DifficultyMethod::kEntropy);

// Globally optimal 1-D k-means by dynamic programming over the sorted
// distinct scores. Clusters are numbered by ascending centroid. The solution
// is exact, so `seed` does not influence it.
DifficultyPartition PartitionKMeans1D(const ScoreMap& scores, int k, std::uint64_t seed = 0,
                                      DifficultyMethod method = DifficultyMethod::kEntropy);

// Sum over groups of squared deviations from the group mean.
double WithinGroupSumOfSquares(const DifficultyPartition& partition);

enum class PartitionMethod { kQuantile, kKMeans };
PartitionMethod ParsePartitionMethod(const std::string& name);

// Scores `dataset` with `method` (the trainer config is only read for the
// loss prior) and partitions it.
DifficultyPartition ScoreAndPartition(const Dataset& dataset, DifficultyMethod method,
                                      PartitionMethod partition_method, int k,
                                      const TrainerConfig& cfg);

// Copies partition scores into the samples' psi fields.
void ApplyScores(Dataset& dataset, const ScoreMap& scores);

// Sidecar JSONL, one {"id","psi","group"} record per sample.
std::string SidecarJsonl(const DifficultyPartition& partition);
DifficultyPartition LoadSidecar(const std::filesystem::path& path, int k,
                                DifficultyMethod method);

// Per-group histogram of scores over `bins` equal-width bins of [0, 1]:
// header `bin_lo,bin_hi,group0,...`.
std::string ScoreHistogramCsv(const DifficultyPartition& partition, int bins);

}  // namespace curdisc
