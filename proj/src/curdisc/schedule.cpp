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

#include "curdisc/schedule.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "curdisc/error.hpp"
#include "curdisc/format.hpp"
#include "json.hpp"

namespace curdisc {

double GlfWeight(double t, const GlfParams& p) {
  const double z = p.rate * (t - p.shift);
  if (z > 700.0) return 1.0;
  if (z < -700.0) return 0.0;
  // Evaluate on the side where exp() cannot overflow.
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void CurriculumConfig::Validate() const {
  Require(k >= 1, "curriculum needs k >= 1");
  Require(per_group.size() == static_cast<std::size_t>(k),
          "curriculum has " + std::to_string(per_group.size()) +
              " groups but k=" + std::to_string(k));
  for (const auto& g : per_group) {
    Require(std::isfinite(g.rate) && std::isfinite(g.shift),
            "curriculum parameters must be finite");
  }
}

double WeightedLoss(double loss, double t, int group, const CurriculumConfig& cfg) {
  if (group < 0 || group >= static_cast<int>(cfg.per_group.size())) {
    Fail(ErrorCode::kOutOfRange, "group " + std::to_string(group) +
                                     " outside curriculum with k=" +
                                     std::to_string(cfg.per_group.size()));
  }
  return GlfWeight(t, cfg.per_group[static_cast<std::size_t>(group)]) * loss;
}

CurriculumConfig Preset(const std::string& name, int k) {
  Require(k >= 2, "presets need k >= 2");
  CurriculumConfig cfg;
  cfg.k = k;
  cfg.name = name;
  cfg.per_group.resize(static_cast<std::size_t>(k));
  auto inc_shift = [k](int g) { return 0.9 * static_cast<double>(g) / (k - 1); };
  for (int g = 0; g < k; ++g) {
    auto& p = cfg.per_group[static_cast<std::size_t>(g)];
    if (name == "inc") {
      p = {10.0, inc_shift(g)};
    } else if (name == "anti") {
      p = {10.0, inc_shift(k - 1 - g)};
    } else if (name == "constant") {
      p = {0.0, 0.0};
    } else {
      Fail(ErrorCode::kInvalidArgument, "unknown curriculum preset '" + name + "'");
    }
  }
  return cfg;
}

std::vector<std::vector<double>> Trajectory(const CurriculumConfig& cfg, int steps) {
  Require(steps >= 2, "trajectory needs steps >= 2");
  cfg.Validate();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(cfg.k),
                                       std::vector<double>(static_cast<std::size_t>(steps)));
  for (int g = 0; g < cfg.k; ++g) {
    for (int i = 0; i < steps; ++i) {
      const double t = static_cast<double>(i) / (steps - 1);
      out[static_cast<std::size_t>(g)][static_cast<std::size_t>(i)] =
          GlfWeight(t, cfg.per_group[static_cast<std::size_t>(g)]);
    }
  }
  return out;
}

std::string TrajectoryCsv(const CurriculumConfig& cfg, int steps) {
  const auto traj = Trajectory(cfg, steps);
  std::ostringstream os;
  os << "t";
  for (int g = 0; g < cfg.k; ++g) os << ",group" << g;
  os << "\n";
  for (int i = 0; i < steps; ++i) {
    os << FormatReal(static_cast<double>(i) / (steps - 1));
    for (int g = 0; g < cfg.k; ++g) {
      os << "," << FormatReal(traj[static_cast<std::size_t>(g)][static_cast<std::size_t>(i)]);
    }
    os << "\n";
  }
  return os.str();
}

std::string CurriculumToJson(const CurriculumConfig& cfg) {
  nlohmann::ordered_json j;
  j["k"] = cfg.k;
  j["groups"] = nlohmann::ordered_json::array();
  for (const auto& g : cfg.per_group) {
    nlohmann::ordered_json e;
    e["r"] = g.rate;
    e["s"] = g.shift;
    j["groups"].push_back(e);
  }
  j["non_monotonic"] = cfg.non_monotonic;
  j["name"] = cfg.name;
  return j.dump(2) + "\n";
}

CurriculumConfig CurriculumFromJson(const std::string& text) {
  CurriculumConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    cfg.k = j.at("k").get<int>();
    for (const auto& g : j.at("groups")) {
      cfg.per_group.push_back({g.at("r").get<double>(), g.at("s").get<double>()});
    }
    cfg.non_monotonic = j.value("non_monotonic", false);
    cfg.name = j.value("name", std::string());
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("malformed curriculum: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

CurriculumConfig LoadCurriculum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return CurriculumFromJson(ss.str());
}

void SaveCurriculum(const CurriculumConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << CurriculumToJson(cfg);
}

}  // namespace curdisc
