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

#include "curdisc/difficulty.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "curdisc/error.hpp"
#include "curdisc/format.hpp"
#include "curdisc/json_io.hpp"
#include "curdisc/log.hpp"

namespace curdisc {
namespace {

struct Scored {
  SampleId id;
  double score;
};

std::vector<Scored> SortedScores(const ScoreMap& scores) {
  std::vector<Scored> v;
  v.reserve(scores.size());
  for (const auto& [id, s] : scores) {
    Require(std::isfinite(s), "non-finite difficulty score for sample " + std::to_string(id));
    v.push_back({id, s});
  }
  std::stable_sort(v.begin(), v.end(),
                   [](const Scored& a, const Scored& b) { return a.score < b.score; });
  return v;
}

void WarnOnEmptyGroups(const DifficultyPartition& p, const char* what) {
  const auto sizes = p.GroupSizes();
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    if (sizes[g] == 0) {
      Warn(std::string(what) + ": group " + std::to_string(g) +
           " is empty (tied scores collapse groups)");
      return;
    }
  }
}

}  // namespace

double EntropyScore(std::span<const int> counts) {
  Require(!counts.empty(), "entropy needs a non-empty counts vector");
  long total = 0;
  for (int c : counts) {
    Require(c >= 0, "annotation counts must be non-negative");
    total += c;
  }
  Require(total > 0, "entropy is undefined for all-zero counts");
  if (counts.size() < 2) return 0.0;
  double h = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return std::clamp(h / std::log(static_cast<double>(counts.size())), 0.0, 1.0);
}

ScoreMap EntropyScores(const Dataset& dataset) {
  ScoreMap out;
  for (const auto& s : dataset.samples) {
    if (!s.counts) {
      Fail(ErrorCode::kInvalidArgument,
           "entropy scoring needs annotation counts; sample " + std::to_string(s.id) +
               " has none");
    }
    out[s.id] = EntropyScore(*s.counts);
  }
  return out;
}

LossPriorResult LossPriorDetailed(const Dataset& train, const TrainerConfig& cfg) {
  TrainerConfig baseline = cfg;
  baseline.strategy = WeightingStrategy{};
  const double snapshots = baseline.epochs / baseline.eval_every;
  Require(snapshots >= 2.0 - 1e-9, "loss prior needs at least two loss snapshots");

  TrainOptions options;
  options.record_loss_snapshots = true;
  const TrainReport report =
      Train(train, nullptr, nullptr, nullptr, baseline, nullptr, options);

  const std::size_t n = train.size();
  std::vector<double> mean(n, 0.0);
  for (const auto& snap : report.loss_snapshots) {
    for (std::size_t i = 0; i < n; ++i) mean[i] += snap[i];
  }
  for (double& m : mean) m /= static_cast<double>(report.loss_snapshots.size());

  const auto [lo_it, hi_it] = std::minmax_element(mean.begin(), mean.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  LossPriorResult result;
  result.snapshots = report.loss_snapshots.size();
  const bool degenerate = !(hi - lo > 1e-12 * std::max(1.0, std::abs(hi)));
  if (degenerate) {
    Warn("loss prior: all averaged losses are equal; every prior set to 0.5");
  }
  for (std::size_t i = 0; i < n; ++i) {
    result.prior[train.samples[i].id] = degenerate ? 0.5 : (mean[i] - lo) / (hi - lo);
  }
  return result;
}

ScoreMap LossPrior(const Dataset& train, const TrainerConfig& cfg) {
  return LossPriorDetailed(train, cfg).prior;
}

DifficultyPartition PartitionQuantile(const ScoreMap& scores, int k, DifficultyMethod method) {
  Require(k >= 2, "partition needs k >= 2");
  if (scores.size() < static_cast<std::size_t>(k)) {
    Fail(ErrorCode::kInsufficientData,
         "k=" + std::to_string(k) + " exceeds the number of samples (" +
             std::to_string(scores.size()) + ")");
  }
  const auto sorted = SortedScores(scores);
  const std::size_t n = sorted.size();
  DifficultyPartition p;
  p.method = method;
  p.k = k;
  p.scores = scores;
  for (int i = 1; i < k; ++i) {
    const std::size_t rank = (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(k) - 1) /
                             static_cast<std::size_t>(k);
    p.boundaries.push_back(sorted[rank - 1].score);
  }
  for (const auto& [id, s] : scores) {
    const auto g = std::lower_bound(p.boundaries.begin(), p.boundaries.end(), s) -
                   p.boundaries.begin();
    p.group_of[id] = static_cast<int>(g);
  }
  WarnOnEmptyGroups(p, "quantile partition");
  return p;
}

DifficultyPartition PartitionKMeans1D(const ScoreMap& scores, int k, std::uint64_t /*seed*/,
                                      DifficultyMethod method) {
  Require(k >= 2, "partition needs k >= 2");
  if (scores.size() < static_cast<std::size_t>(k)) {
    Fail(ErrorCode::kInsufficientData,
         "k=" + std::to_string(k) + " exceeds the number of samples (" +
             std::to_string(scores.size()) + ")");
  }
  const auto sorted = SortedScores(scores);

  // Distinct values with multiplicities; equal scores always share a cluster.
  std::vector<double> value;
  std::vector<double> weight;
  for (const auto& s : sorted) {
    if (value.empty() || s.score != value.back()) {
      value.push_back(s.score);
      weight.push_back(0.0);
    }
    weight.back() += 1.0;
  }
  const std::size_t m = value.size();
  std::size_t clusters = static_cast<std::size_t>(k);
  if (clusters > m) {
    Warn("kmeans partition: k=" + std::to_string(k) + " exceeds the " + std::to_string(m) +
         " distinct scores; clusters collapsed");
    clusters = m;
  }

  std::vector<double> pw(m + 1, 0.0), ps(m + 1, 0.0), pq(m + 1, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    pw[j + 1] = pw[j] + weight[j];
    ps[j + 1] = ps[j] + weight[j] * value[j];
    pq[j + 1] = pq[j] + weight[j] * value[j] * value[j];
  }
  // Cost of one cluster holding distinct values [a, b].
  auto cost = [&](std::size_t a, std::size_t b) {
    const double w = pw[b + 1] - pw[a];
    const double s = ps[b + 1] - ps[a];
    return std::max(0.0, (pq[b + 1] - pq[a]) - s * s / w);
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // best[c][j]: optimal cost of values [0, j] in c+1 clusters; start[c][j]
  // the first value of the last cluster.
  std::vector<std::vector<double>> best(clusters, std::vector<double>(m, kInf));
  std::vector<std::vector<std::size_t>> start(clusters, std::vector<std::size_t>(m, 0));
  for (std::size_t j = 0; j < m; ++j) best[0][j] = cost(0, j);
  for (std::size_t c = 1; c < clusters; ++c) {
    for (std::size_t j = c; j < m; ++j) {
      for (std::size_t i = c; i <= j; ++i) {
        const double v = best[c - 1][i - 1] + cost(i, j);
        if (v < best[c][j]) {
          best[c][j] = v;
          start[c][j] = i;
        }
      }
    }
  }

  std::vector<int> cluster_of_value(m, 0);
  std::size_t end = m;
  for (std::size_t c = clusters; c-- > 0;) {
    const std::size_t first = c == 0 ? 0 : start[c][end - 1];
    for (std::size_t j = first; j < end; ++j) cluster_of_value[j] = static_cast<int>(c);
    end = first;
  }

  DifficultyPartition p;
  p.method = method;
  p.k = k;
  p.scores = scores;
  for (int g = 0; g + 1 < k; ++g) {
    double boundary = value.back();
    for (std::size_t j = 0; j < m; ++j) {
      if (cluster_of_value[j] == g) boundary = value[j];
    }
    if (static_cast<std::size_t>(g) >= clusters) boundary = value.back();
    p.boundaries.push_back(boundary);
  }
  for (const auto& [id, s] : scores) {
    const auto j = std::lower_bound(value.begin(), value.end(), s) - value.begin();
    p.group_of[id] = cluster_of_value[static_cast<std::size_t>(j)];
  }
  return p;
}

double WithinGroupSumOfSquares(const DifficultyPartition& p) {
  std::vector<double> sum(static_cast<std::size_t>(p.k), 0.0);
  std::vector<double> count(static_cast<std::size_t>(p.k), 0.0);
  for (const auto& [id, g] : p.group_of) {
    sum[static_cast<std::size_t>(g)] += p.scores.at(id);
    count[static_cast<std::size_t>(g)] += 1.0;
  }
  double ss = 0.0;
  for (const auto& [id, g] : p.group_of) {
    const auto gi = static_cast<std::size_t>(g);
    const double d = p.scores.at(id) - sum[gi] / count[gi];
    ss += d * d;
  }
  return ss;
}

PartitionMethod ParsePartitionMethod(const std::string& name) {
  if (name == "quantile") return PartitionMethod::kQuantile;
  if (name == "kmeans") return PartitionMethod::kKMeans;
  Fail(ErrorCode::kInvalidArgument, "unknown partition method '" + name + "'");
}

DifficultyPartition ScoreAndPartition(const Dataset& dataset, DifficultyMethod method,
                                      PartitionMethod partition_method, int k,
                                      const TrainerConfig& cfg) {
  const ScoreMap scores =
      method == DifficultyMethod::kEntropy ? EntropyScores(dataset) : LossPrior(dataset, cfg);
  return partition_method == PartitionMethod::kQuantile
             ? PartitionQuantile(scores, k, method)
             : PartitionKMeans1D(scores, k, cfg.seed, method);
}

void ApplyScores(Dataset& dataset, const ScoreMap& scores) {
  for (auto& s : dataset.samples) {
    auto it = scores.find(s.id);
    if (it != scores.end()) s.psi = it->second;
  }
}

std::string SidecarJsonl(const DifficultyPartition& p) {
  std::string out;
  for (const auto& [id, g] : p.group_of) {
    nlohmann::ordered_json rec;
    rec["id"] = id;
    rec["psi"] = RealToJson(p.scores.count(id) ? p.scores.at(id)
                                               : std::numeric_limits<double>::quiet_NaN());
    rec["group"] = g;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

DifficultyPartition LoadSidecar(const std::filesystem::path& path, int k,
                                DifficultyMethod method) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  DifficultyPartition p;
  p.method = method;
  std::string line;
  std::size_t lineno = 0;
  int max_group = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto id = j.at("id").get<SampleId>();
      const int g = j.at("group").get<int>();
      p.group_of[id] = g;
      if (!j.at("psi").is_null()) p.scores[id] = j.at("psi").get<double>();
      max_group = std::max(max_group, g);
    } catch (const std::exception& e) {
      Fail(ErrorCode::kParse,
           path.string() + ":" + std::to_string(lineno) + ": malformed sidecar record: " + e.what());
    }
  }
  p.k = k > 0 ? k : max_group + 1;
  for (int g = 0; g + 1 < p.k; ++g) {
    double boundary = -std::numeric_limits<double>::infinity();
    for (const auto& [id, grp] : p.group_of) {
      if (grp <= g && p.scores.count(id)) boundary = std::max(boundary, p.scores.at(id));
    }
    p.boundaries.push_back(boundary);
  }
  p.Validate();
  return p;
}

std::string ScoreHistogramCsv(const DifficultyPartition& p, int bins) {
  Require(bins >= 1, "histogram needs bins >= 1");
  std::vector<std::vector<std::size_t>> hist(static_cast<std::size_t>(bins),
                                             std::vector<std::size_t>(static_cast<std::size_t>(p.k), 0));
  for (const auto& [id, g] : p.group_of) {
    auto it = p.scores.find(id);
    if (it == p.scores.end()) continue;
    int b = static_cast<int>(std::floor(std::clamp(it->second, 0.0, 1.0) * bins));
    b = std::min(b, bins - 1);
    ++hist[static_cast<std::size_t>(b)][static_cast<std::size_t>(g)];
  }
  std::ostringstream os;
  os << "bin_lo,bin_hi";
  for (int g = 0; g < p.k; ++g) os << ",group" << g;
  os << "\n";
  for (int b = 0; b < bins; ++b) {
    os << FormatReal(static_cast<double>(b) / bins) << ","
       << FormatReal(static_cast<double>(b + 1) / bins);
    for (int g = 0; g < p.k; ++g) os << "," << hist[static_cast<std::size_t>(b)][static_cast<std::size_t>(g)];
    os << "\n";
  }
  return os.str();
}

}  // namespace curdisc
