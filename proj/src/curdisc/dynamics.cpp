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

#include "curdisc/dynamics.hpp"

#include <algorithm>
#include <sstream>

#include "curdisc/error.hpp"

namespace curdisc {

DifficultyPartition Reassign(const ScoreMap& losses, const DifficultyPartition& partition) {
  Require(partition.k >= 2, "reassign needs k >= 2");
  const auto k = static_cast<std::size_t>(partition.k);
  std::vector<double> sum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (const auto& [id, g] : partition.group_of) {
    auto it = losses.find(id);
    if (it == losses.end()) {
      Fail(ErrorCode::kInvalidArgument,
           "reassign: no loss recorded for sample " + std::to_string(id));
    }
    sum[static_cast<std::size_t>(g)] += it->second;
    ++count[static_cast<std::size_t>(g)];
  }

  DifficultyPartition next = partition;
  for (auto& [id, g] : next.group_of) {
    const auto c = static_cast<std::size_t>(partition.group_of.at(id));
    const double mean = sum[c] / static_cast<double>(count[c]);
    if (losses.at(id) > mean) {
      g = std::min(g + 1, partition.k - 1);
    } else {
      g = std::max(g - 1, 0);
    }
  }
  return next;
}

GroupTrajectories ReassignmentLog(const std::vector<DifficultyPartition>& history) {
  GroupTrajectories log;
  if (history.empty()) return log;
  const auto& first = history.front();
  for (const auto& [id, g] : first.group_of) log.ids.push_back(id);
  log.groups.assign(log.ids.size(), std::vector<int>(history.size()));
  for (std::size_t e = 0; e < history.size(); ++e) {
    const auto& p = history[e];
    Require(p.k == first.k, "reassignment log: partitions disagree on k");
    Require(p.group_of.size() == first.group_of.size(),
            "reassignment log: mismatched id sets");
    std::size_t row = 0;
    for (const auto& [id, g] : p.group_of) {
      Require(id == log.ids[row], "reassignment log: mismatched id sets");
      log.groups[row][e] = g;
      ++row;
    }
  }
  return log;
}

std::string ReassignmentLogCsv(const GroupTrajectories& log) {
  std::ostringstream os;
  os << "id";
  const std::size_t evals = log.groups.empty() ? 0 : log.groups.front().size();
  for (std::size_t e = 0; e < evals; ++e) os << ",eval" << e;
  os << "\n";
  for (std::size_t r = 0; r < log.ids.size(); ++r) {
    os << log.ids[r];
    for (int g : log.groups[r]) os << "," << g;
    os << "\n";
  }
  return os.str();
}

}  // namespace curdisc
