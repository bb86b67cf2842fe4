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

#include "curdisc/partition.hpp"
#include "json.hpp"

namespace curdisc {

// JSON helpers shared by the report, sidecar and trial-store writers.
nlohmann::ordered_json PartitionToJson(const DifficultyPartition& p);
DifficultyPartition PartitionFromJson(const nlohmann::json& j);

// NaN and infinities have no JSON representation; they are written as null
// and read back as NaN.
nlohmann::ordered_json RealToJson(double v);
double RealFromJson(const nlohmann::json& j);

}  // namespace curdisc
