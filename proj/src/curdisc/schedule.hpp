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

#include <filesystem>
#include <string>
#include <vector>

namespace curdisc {

// Parameters of one generalized logistic weight curve.
struct GlfParams {
  double rate = 0.0;   // > 0 raises the weight over training, < 0 lowers it.
  double shift = 0.0;  // training progress at which the weight crosses 0.5.

  bool operator==(const GlfParams&) const = default;
};

// w(t) = 1 / (1 + exp(-rate * (t - shift))), saturating to exactly 0 or 1
// once |rate * (t - shift)| exceeds 700.
double GlfWeight(double t, const GlfParams& p);

// One weight curve per difficulty group, group 0 being the easiest.
struct CurriculumConfig {
  int k = 0;
  std::vector<GlfParams> per_group;
  // Move samples between adjacent groups at every evaluation boundary.
  bool non_monotonic = false;
  std::string name;

  void Validate() const;
  bool operator==(const CurriculumConfig&) const = default;
};

// Loss of one sample scaled by its group's weight at progress t. No batch
// renormalization is applied.
double WeightedLoss(double loss, double t, int group, const CurriculumConfig& cfg);

// "inc": easiest group first, rate +10 and shifts spaced linearly from 0
// (easiest) to 0.9 (hardest). "anti": the same shifts reversed across groups.
// "constant": rate 0, every weight 0.5.
CurriculumConfig Preset(const std::string& name, int k);

// k x steps matrix of weights at t = i / (steps - 1).
std::vector<std::vector<double>> Trajectory(const CurriculumConfig& cfg, int steps);

// CSV with a header row `t,group0,...` and one row per time step.
std::string TrajectoryCsv(const CurriculumConfig& cfg, int steps);

// {"k": int, "groups": [{"r": float, "s": float}...], "non_monotonic": bool,
//  "name": str}
std::string CurriculumToJson(const CurriculumConfig& cfg);
CurriculumConfig CurriculumFromJson(const std::string& text);
CurriculumConfig LoadCurriculum(const std::filesystem::path& path);
void SaveCurriculum(const CurriculumConfig& cfg, const std::filesystem::path& path);

}  // namespace curdisc
