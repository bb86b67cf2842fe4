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

#include "curdisc/partition.hpp"

#include "curdisc/error.hpp"

namespace curdisc {

std::string ToString(DifficultyMethod method) {
  switch (method) {
    case DifficultyMethod::kEntropy:
      return "entropy";
    case DifficultyMethod::kLoss:
      return "loss";
  }
  return "unknown";
}

DifficultyMethod ParseDifficultyMethod(const std::string& name) {
  if (name == "entropy") return DifficultyMethod::kEntropy;
  if (name == "loss") return DifficultyMethod::kLoss;
  Fail(ErrorCode::kInvalidArgument, "unknown difficulty method '" + name + "'");
}

int DifficultyPartition::GroupOf(SampleId id) const {
  auto it = group_of.find(id);
  if (it == group_of.end()) {
    Fail(ErrorCode::kOutOfRange,
         "sample id " + std::to_string(id) + " is not in the partition");
  }
  return it->second;
}

std::vector<std::size_t> DifficultyPartition::GroupSizes() const {
  std::vector<std::size_t> sizes(k > 0 ? static_cast<std::size_t>(k) : 0, 0);
  for (const auto& [id, g] : group_of) {
    if (g >= 0 && g < k) ++sizes[static_cast<std::size_t>(g)];
  }
  return sizes;
}

void DifficultyPartition::Validate() const {
  Require(k >= 2, "partition needs k >= 2, got " + std::to_string(k));
  Require(boundaries.size() == static_cast<std::size_t>(k - 1),
          "partition needs k-1 boundaries");
  for (const auto& [id, g] : group_of) {
    Require(g >= 0 && g < k, "sample " + std::to_string(id) +
                                 " has group " + std::to_string(g) +
                                 " outside [0, k)");
  }
}

bool operator==(const DifficultyPartition& a, const DifficultyPartition& b) {
  return a.method == b.method && a.k == b.k && a.boundaries == b.boundaries &&
         a.group_of == b.group_of && a.scores == b.scores;
}

}  // namespace curdisc
