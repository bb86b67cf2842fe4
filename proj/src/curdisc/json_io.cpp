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

#include "curdisc/json_io.hpp"

#include <cmath>
#include <limits>

namespace curdisc {

nlohmann::ordered_json RealToJson(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

double RealFromJson(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

nlohmann::ordered_json PartitionToJson(const DifficultyPartition& p) {
  nlohmann::ordered_json j;
  j["method"] = ToString(p.method);
  j["k"] = p.k;
  j["boundaries"] = p.boundaries;
  auto groups = nlohmann::ordered_json::array();
  for (const auto& [id, g] : p.group_of) {
    nlohmann::ordered_json e = nlohmann::ordered_json::array();
    e.push_back(id);
    e.push_back(g);
    auto s = p.scores.find(id);
    e.push_back(s == p.scores.end() ? nlohmann::ordered_json(nullptr) : RealToJson(s->second));
    groups.push_back(std::move(e));
  }
  j["members"] = std::move(groups);
  return j;
}

DifficultyPartition PartitionFromJson(const nlohmann::json& j) {
  DifficultyPartition p;
  p.method = ParseDifficultyMethod(j.at("method").get<std::string>());
  p.k = j.at("k").get<int>();
  p.boundaries = j.at("boundaries").get<std::vector<double>>();
  for (const auto& e : j.at("members")) {
    const auto id = e.at(0).get<SampleId>();
    p.group_of[id] = e.at(1).get<int>();
    if (e.size() > 2 && !e.at(2).is_null()) p.scores[id] = e.at(2).get<double>();
  }
  return p;
}

}  // namespace curdisc
