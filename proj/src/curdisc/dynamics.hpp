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

#include <string>
#include <vector>

#include "curdisc/partition.hpp"

namespace curdisc {

// One promotion/demotion pass. Within each group, members whose loss is
// strictly above the group mean move one group harder; all others move one
// group easier. Moves are computed against the input snapshot and clamped to
// [0, k-1]. Empty groups are skipped.
DifficultyPartition Reassign(const ScoreMap& losses, const DifficultyPartition& partition);

// Group index of every sample at every recorded evaluation point.
struct GroupTrajectories {
  std::vector<SampleId> ids;             // ascending
  std::vector<std::vector<int>> groups;  // [sample][evaluation]
};

// All partitions must share k and the same id set.
GroupTrajectories ReassignmentLog(const std::vector<DifficultyPartition>& history);

// Header `id,eval0,eval1,...`, one row per sample.
std::string ReassignmentLogCsv(const GroupTrajectories& log);

}  // namespace curdisc
