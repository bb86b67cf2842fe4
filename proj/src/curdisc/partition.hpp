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

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace curdisc {

using SampleId = std::int64_t;
using ScoreMap = std::map<SampleId, double>;

enum class DifficultyMethod { kEntropy, kLoss };

std::string ToString(DifficultyMethod method);
DifficultyMethod ParseDifficultyMethod(const std::string& name);

// Assignment of every sample of a dataset to one of k difficulty groups,
// group 0 being the easiest.
struct DifficultyPartition {
  DifficultyMethod method = DifficultyMethod::kEntropy;
  int k = 0;
  // k-1 ascending thresholds; a score equal to boundaries[i] belongs to group
  // i or lower.
  std::vector<double> boundaries;
  std::map<SampleId, int> group_of;
  // The difficulty score each assignment was derived from.
  ScoreMap scores;

  int GroupOf(SampleId id) const;
  std::vector<std::size_t> GroupSizes() const;
  std::size_t size() const { return group_of.size(); }

  // Throws if a group index is out of [0, k) or k < 2.
  void Validate() const;
};

bool operator==(const DifficultyPartition& a, const DifficultyPartition& b);

}  // namespace curdisc
