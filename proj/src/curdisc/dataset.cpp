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

#include "curdisc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "curdisc/error.hpp"
#include "curdisc/rng.hpp"
#include "json.hpp"

namespace curdisc {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string LineError(const std::filesystem::path& path, std::size_t line,
                      const std::string& what) {
  return path.string() + ":" + std::to_string(line) + ": " + what;
}

// Round to 12 significant digits so that synthesized values serialize
// identically regardless of last-ulp differences between math libraries.
double Round12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

AnnotatedSample ParseJsonRecord(const json& rec) {
  if (!rec.is_object()) throw std::runtime_error("record is not an object");
  AnnotatedSample s;
  if (!rec.contains("id") || !rec["id"].is_number_integer()) {
    throw std::runtime_error("missing integer field \"id\"");
  }
  s.id = rec["id"].get<SampleId>();
  if (!rec.contains("x") || !rec["x"].is_array()) {
    throw std::runtime_error("missing array field \"x\"");
  }
  for (const auto& v : rec["x"]) {
    if (!v.is_number()) throw std::runtime_error("non-numeric feature");
    s.features.push_back(v.get<double>());
  }
  if (!rec.contains("y") || !rec["y"].is_number_integer()) {
    throw std::runtime_error("missing integer field \"y\"");
  }
  s.label = rec["y"].get<int>();
  if (s.label < 0) throw std::runtime_error("negative label");
  if (rec.contains("counts") && !rec["counts"].is_null()) {
    if (!rec["counts"].is_array()) throw std::runtime_error("counts not array");
    std::vector<int> counts;
    for (const auto& v : rec["counts"]) {
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw std::runtime_error("counts must be non-negative integers");
      }
      counts.push_back(v.get<int>());
    }
    s.counts = std::move(counts);
  }
  return s;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool ParseDouble(const std::string& text, double& out) {
  const char* begin = text.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  return end != begin && end && *end == '\0' && std::isfinite(out);
}

bool ParseInt(const std::string& text, int& out) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const long v = std::strtol(begin, &end, 10);
  while (end && *end == ' ') ++end;
  if (end == begin || !end || *end != '\0') return false;
  out = static_cast<int>(v);
  return true;
}

// Per-line validation shared by both readers; `line_of` maps the sample
// index back to a source line for error messages.
void ValidateLoaded(const std::filesystem::path& path, Dataset& d,
                    const std::vector<std::size_t>& line_of,
                    int requested_classes) {
  int inferred = requested_classes;
  std::optional<std::size_t> count_len;
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    const auto& s = d.samples[i];
    if (!s.counts) continue;
    if (count_len && *count_len != s.counts->size()) {
      Fail(ErrorCode::kParse,
           LineError(path, line_of[i], "inconsistent counts length"));
    }
    count_len = s.counts->size();
  }
  if (inferred == 0) {
    if (count_len) {
      inferred = static_cast<int>(*count_len);
    } else {
      int max_label = 1;
      for (const auto& s : d.samples) max_label = std::max(max_label, s.label);
      inferred = max_label + 1;
    }
  }
  if (inferred < 2) Fail(ErrorCode::kParse, path.string() + ": C must be >= 2");
  d.num_classes = inferred;

  std::set<SampleId> ids;
  const std::size_t dim = d.dim();
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    const auto& s = d.samples[i];
    const std::size_t line = line_of[i];
    if (s.features.size() != dim) {
      Fail(ErrorCode::kParse,
           LineError(path, line,
                     "feature dimension " + std::to_string(s.features.size()) +
                         " differs from " + std::to_string(dim)));
    }
    if (s.label >= d.num_classes) {
      Fail(ErrorCode::kParse,
           LineError(path, line,
                     "label " + std::to_string(s.label) + " >= C=" +
                         std::to_string(d.num_classes)));
    }
    if (s.counts && s.counts->size() != static_cast<std::size_t>(d.num_classes)) {
      Fail(ErrorCode::kParse, LineError(path, line, "counts length != C"));
    }
    if (!ids.insert(s.id).second) {
      Fail(ErrorCode::kParse,
           LineError(path, line, "duplicate id " + std::to_string(s.id)));
    }
  }
}

Dataset LoadJsonl(const std::filesystem::path& path, std::ifstream& in,
                  int num_classes, SplitTag split) {
  Dataset d;
  d.split = split;
  std::vector<std::size_t> line_of;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      d.samples.push_back(ParseJsonRecord(json::parse(line)));
    } catch (const std::exception& e) {
      Fail(ErrorCode::kParse,
           LineError(path, lineno, std::string("malformed record: ") + e.what()));
    }
    line_of.push_back(lineno);
  }
  ValidateLoaded(path, d, line_of, num_classes);
  return d;
}

Dataset LoadCsv(const std::filesystem::path& path, std::ifstream& in,
                int num_classes, SplitTag split) {
  Dataset d;
  d.split = split;
  std::vector<std::size_t> line_of;
  std::string line;
  std::size_t lineno = 0;
  SampleId next_id = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto cells = SplitCsv(line);
    AnnotatedSample s;
    bool ok = cells.size() >= 2;
    for (std::size_t c = 0; ok && c + 1 < cells.size(); ++c) {
      double v;
      ok = ParseDouble(cells[c], v);
      s.features.push_back(v);
    }
    ok = ok && ParseInt(cells.back(), s.label) && s.label >= 0;
    if (!ok) {
      // A non-numeric first line is a header.
      if (lineno == 1 && d.samples.empty()) continue;
      Fail(ErrorCode::kParse, LineError(path, lineno, "malformed record"));
    }
    s.id = next_id++;
    d.samples.push_back(std::move(s));
    line_of.push_back(lineno);
  }
  ValidateLoaded(path, d, line_of, num_classes);
  return d;
}

}  // namespace

std::string ToString(SplitTag tag) {
  switch (tag) {
    case SplitTag::kTrain:
      return "train";
    case SplitTag::kDev:
      return "dev";
    case SplitTag::kTest:
      return "test";
  }
  return "unknown";
}

bool Dataset::has_counts() const {
  return std::any_of(samples.begin(), samples.end(),
                     [](const AnnotatedSample& s) { return s.counts.has_value(); });
}

void Dataset::Validate() const {
  Require(num_classes >= 2, "dataset needs C >= 2");
  std::set<SampleId> ids;
  const std::size_t d = dim();
  for (const auto& s : samples) {
    Require(ids.insert(s.id).second, "duplicate sample id " + std::to_string(s.id));
    Require(s.features.size() == d, "inconsistent feature dimensionality");
    Require(s.label >= 0 && s.label < num_classes,
            "label out of range for sample " + std::to_string(s.id));
    if (s.counts) {
      Require(s.counts->size() == static_cast<std::size_t>(num_classes),
              "counts length != C for sample " + std::to_string(s.id));
      for (int c : *s.counts) Require(c >= 0, "negative annotation count");
    }
  }
}

DataFormat ParseDataFormat(const std::string& name) {
  if (name == "jsonl") return DataFormat::kJsonl;
  if (name == "csv") return DataFormat::kCsv;
  Fail(ErrorCode::kInvalidArgument, "unknown data format '" + name + "'");
}

Dataset LoadDataset(const std::filesystem::path& path, DataFormat format,
                    int num_classes, SplitTag split) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  return format == DataFormat::kJsonl ? LoadJsonl(path, in, num_classes, split)
                                      : LoadCsv(path, in, num_classes, split);
}

std::string SerializeJsonl(const Dataset& dataset) {
  std::string out;
  for (const auto& s : dataset.samples) {
    ordered_json rec;
    rec["id"] = s.id;
    rec["x"] = s.features;
    rec["y"] = s.label;
    if (s.counts) rec["counts"] = *s.counts;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

void SaveDataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << SerializeJsonl(dataset);
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

SynthesisResult Synthesize(const SynthesisParams& p) {
  Require(p.n >= 30, "synthesize needs n >= 30");
  Require(p.num_classes >= 2, "synthesize needs C >= 2");
  Require(p.annotators >= 3, "synthesize needs at least 3 annotators");
  Require(p.noise_hard >= 0.0 && p.noise_hard <= 1.0, "noise_hard must be in [0, 1]");
  Require(p.dim >= p.num_classes, "feature dim must be >= C");

  const int C = p.num_classes;
  Rng rng(DeriveSeed(p.seed, 0));
  SynthesisResult result;
  std::vector<AnnotatedSample> all;
  all.reserve(static_cast<std::size_t>(p.n));

  for (int i = 0; i < p.n; ++i) {
    const double delta = rng.Uniform();
    const int truth = static_cast<int>(rng.Below(static_cast<std::uint64_t>(C)));

    AnnotatedSample s;
    s.id = i;
    s.features.resize(static_cast<std::size_t>(p.dim));
    const double spread = 1.0 + p.hard_spread * delta;
    for (int j = 0; j < p.dim; ++j) {
      const double center = (j == truth) ? (1.0 - delta) * p.separation : 0.0;
      s.features[static_cast<std::size_t>(j)] = Round12(center + spread * rng.Normal());
    }

    std::vector<int> counts(static_cast<std::size_t>(C), 0);
    const double p_wrong = delta * p.noise_hard;
    for (int a = 0; a < p.annotators; ++a) {
      int vote = truth;
      if (rng.Uniform() < p_wrong) {
        // Uniform over the C-1 other classes.
        vote = static_cast<int>(rng.Below(static_cast<std::uint64_t>(C - 1)));
        if (vote >= truth) ++vote;
      }
      ++counts[static_cast<std::size_t>(vote)];
    }
    // max_element returns the first maximum: ties go to the lowest class.
    s.label = static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                               counts.begin());
    s.counts = std::move(counts);

    result.latent_difficulty[s.id] = Round12(delta);
    result.true_label[s.id] = truth;
    all.push_back(std::move(s));
  }

  // Stratified 60/20/20 split.
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(C));
  for (std::size_t i = 0; i < all.size(); ++i) {
    by_class[static_cast<std::size_t>(all[i].label)].push_back(i);
  }
  Rng split_rng(DeriveSeed(p.seed, 1));
  std::vector<int> split_of(all.size(), 0);
  for (auto& members : by_class) {
    if (members.empty()) continue;
    if (members.size() < 5) {
      Fail(ErrorCode::kInsufficientData,
           "n too small to stratify splits: a gold class has only " +
               std::to_string(members.size()) + " samples");
    }
    split_rng.Shuffle(members);
    const std::size_t cnt = members.size();
    const std::size_t n_train = (cnt * 6 + 5) / 10;
    const std::size_t n_dev = (cnt * 2 + 5) / 10;
    for (std::size_t j = 0; j < cnt; ++j) {
      split_of[members[j]] = j < n_train ? 0 : (j < n_train + n_dev ? 1 : 2);
    }
  }

  Dataset* splits[3] = {&result.train, &result.dev, &result.test};
  const SplitTag tags[3] = {SplitTag::kTrain, SplitTag::kDev, SplitTag::kTest};
  for (int t = 0; t < 3; ++t) {
    splits[t]->num_classes = C;
    splits[t]->split = tags[t];
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    splits[split_of[i]]->samples.push_back(std::move(all[i]));
  }
  return result;
}

Dataset DifficultyBalancedSubsample(const Dataset& dataset,
                                    const DifficultyPartition& partition,
                                    int per_group, std::uint64_t seed) {
  Require(per_group >= 1, "per_group must be >= 1");
  partition.Validate();
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(partition.k));
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const int g = partition.GroupOf(dataset.samples[i].id);
    members[static_cast<std::size_t>(g)].push_back(i);
  }
  std::vector<std::size_t> chosen;
  for (int g = 0; g < partition.k; ++g) {
    auto& m = members[static_cast<std::size_t>(g)];
    if (m.size() < static_cast<std::size_t>(per_group)) {
      Fail(ErrorCode::kInsufficientData,
           "group " + std::to_string(g) + " has " + std::to_string(m.size()) +
               " members, fewer than per_group=" + std::to_string(per_group));
    }
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(g)));
    rng.Shuffle(m);
    chosen.insert(chosen.end(), m.begin(), m.begin() + per_group);
  }
  std::sort(chosen.begin(), chosen.end());
  Dataset out;
  out.num_classes = dataset.num_classes;
  out.split = dataset.split;
  for (std::size_t i : chosen) out.samples.push_back(dataset.samples[i]);
  return out;
}

std::string DescribeDataset(const Dataset& d) {
  std::ostringstream os;
  os << "split: " << ToString(d.split) << "\n";
  os << "samples: " << d.size() << "\n";
  os << "classes: " << d.num_classes << "\n";
  os << "feature_dim: " << d.dim() << "\n";
  std::vector<std::size_t> hist(static_cast<std::size_t>(d.num_classes), 0);
  std::size_t with_counts = 0;
  long min_votes = -1, max_votes = -1;
  for (const auto& s : d.samples) {
    if (s.label >= 0 && s.label < d.num_classes) ++hist[static_cast<std::size_t>(s.label)];
    if (s.counts) {
      ++with_counts;
      long total = 0;
      for (int c : *s.counts) total += c;
      min_votes = min_votes < 0 ? total : std::min(min_votes, total);
      max_votes = std::max(max_votes, total);
    }
  }
  os << "label_histogram:";
  for (std::size_t c = 0; c < hist.size(); ++c) os << " " << c << "=" << hist[c];
  os << "\n";
  os << "with_counts: " << with_counts << "\n";
  if (with_counts > 0) {
    os << "annotations_per_sample: " << min_votes << ".." << max_votes << "\n";
  }
  return os.str();
}

}  // namespace curdisc
