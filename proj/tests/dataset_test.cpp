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

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "curdisc/dataset.hpp"
#include "curdisc/difficulty.hpp"
#include "curdisc/error.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace curdisc;
using curdisc::testing::TempDir;
using curdisc::testing::WriteText;

namespace {

std::vector<double> Ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t m = i; m <= j; ++m) r[idx[m]] = avg;
    i = j + 1;
  }
  return r;
}

double Pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double Spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return Pearson(Ranks(a), Ranks(b));
}

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

}  // namespace

TEST_CASE("load jsonl") {
  TempDir dir;
  WriteText(dir / "d.jsonl",
            "{\"id\": 4, \"x\": [0.5, 1], \"y\": 1, \"counts\": [1, 4]}\n"
            "{\"id\": 2, \"x\": [-1, 2.25], \"y\": 0, \"counts\": [3, 0]}\n"
            "\n"
            "{\"id\": 9, \"x\": [0, 0], \"y\": 1, \"counts\": [2, 3]}\n");
  const Dataset d = LoadDataset(dir / "d.jsonl", DataFormat::kJsonl);
  CHECK(d.size() == 3);
  CHECK(d.num_classes == 2);
  CHECK(d.dim() == 2);
  CHECK(d.samples[0].id == 4);
  CHECK(d.samples[1].id == 2);
  CHECK(*d.samples[2].counts == std::vector<int>{2, 3});
  CHECK_FALSE(d.samples[0].psi.has_value());
}

TEST_CASE("load jsonl without counts keeps them absent") {
  TempDir dir;
  WriteText(dir / "d.jsonl", "{\"id\": 0, \"x\": [1], \"y\": 2}\n{\"id\": 1, \"x\": [2], \"y\": 0}\n");
  const Dataset d = LoadDataset(dir / "d.jsonl", DataFormat::kJsonl);
  CHECK(d.num_classes == 3);
  CHECK_FALSE(d.has_counts());
  CHECK_FALSE(d.samples[0].counts.has_value());
}

TEST_CASE("load errors name the offending line") {
  TempDir dir;
  WriteText(dir / "bad.jsonl",
            "{\"id\": 0, \"x\": [1], \"y\": 0}\n{\"id\": 1, \"x\": [1], \"y\": 5}\n");
  try {
    LoadDataset(dir / "bad.jsonl", DataFormat::kJsonl, 3);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("bad.jsonl:2:") != std::string::npos);
  }
  WriteText(dir / "dim.jsonl", "{\"id\": 0, \"x\": [1, 2], \"y\": 0}\n{\"id\": 1, \"x\": [1], \"y\": 1}\n");
  CHECK(CodeOf([&] { LoadDataset(dir / "dim.jsonl", DataFormat::kJsonl); }) == ErrorCode::kParse);
  WriteText(dir / "junk.jsonl", "{\"id\": 0, \"x\": [1], \"y\": 0}\n{\"id\": \n");
  try {
    LoadDataset(dir / "junk.jsonl", DataFormat::kJsonl);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  WriteText(dir / "dup.jsonl", "{\"id\": 0, \"x\": [1], \"y\": 0}\n{\"id\": 0, \"x\": [1], \"y\": 1}\n");
  CHECK(CodeOf([&] { LoadDataset(dir / "dup.jsonl", DataFormat::kJsonl); }) == ErrorCode::kParse);
  CHECK(CodeOf([&] { LoadDataset(dir / "nope.jsonl", DataFormat::kJsonl); }) == ErrorCode::kIo);
}

TEST_CASE("load csv with and without header") {
  TempDir dir;
  WriteText(dir / "h.csv", "f0,f1,label\n0.5,1,1\n2,3,0\n");
  const Dataset h = LoadDataset(dir / "h.csv", DataFormat::kCsv);
  CHECK(h.size() == 2);
  CHECK(h.samples[0].features == std::vector<double>{0.5, 1.0});
  CHECK(h.samples[1].id == 1);
  CHECK_FALSE(h.has_counts());
  WriteText(dir / "n.csv", "1,2,0\n3,4,1\n5,6,2\n");
  CHECK(LoadDataset(dir / "n.csv", DataFormat::kCsv).num_classes == 3);
  WriteText(dir / "b.csv", "1,2,0\n3,x,1\n");
  CHECK(CodeOf([&] { LoadDataset(dir / "b.csv", DataFormat::kCsv); }) == ErrorCode::kParse);
}

TEST_CASE("save then load is field-for-field equal and byte stable") {
  TempDir dir;
  const auto syn = testing::SmallSynthetic();
  SaveDataset(syn.train, dir / "t.jsonl");
  const Dataset back = LoadDataset(dir / "t.jsonl", DataFormat::kJsonl, 0, SplitTag::kTrain);
  CHECK(back == syn.train);
  CHECK(SerializeJsonl(back) == testing::ReadText(dir / "t.jsonl"));
}

TEST_CASE("synthesis invariants") {
  SynthesisParams p;
  p.n = 300;
  p.seed = 7;
  const auto syn = Synthesize(p);
  CHECK(syn.train.size() + syn.dev.size() + syn.test.size() == 300);
  std::vector<double> entropy, delta;
  for (const Dataset* d : {&syn.train, &syn.dev, &syn.test}) {
    d->Validate();
    for (const auto& s : d->samples) {
      REQUIRE(s.counts.has_value());
      CHECK(std::accumulate(s.counts->begin(), s.counts->end(), 0) == p.annotators);
      const int top = *std::max_element(s.counts->begin(), s.counts->end());
      int first = 0;
      while ((*s.counts)[first] != top) ++first;
      CHECK(s.label == first);
      entropy.push_back(EntropyScore(*s.counts));
      delta.push_back(syn.latent_difficulty.at(s.id));
    }
  }
  CHECK(Spearman(entropy, delta) > 0.5);

  // stratified 60/20/20 by gold label
  std::vector<int> tr(3, 0), all(3, 0);
  for (const auto& s : syn.train.samples) tr[s.label]++;
  for (const Dataset* d : {&syn.train, &syn.dev, &syn.test}) {
    for (const auto& s : d->samples) all[s.label]++;
  }
  for (int c = 0; c < 3; ++c) CHECK(std::abs(tr[c] - 0.6 * all[c]) <= 1.0);
}

TEST_CASE("synthesis without noise is unanimous") {
  SynthesisParams p;
  p.n = 90;
  p.noise_hard = 0.0;
  const auto syn = Synthesize(p);
  for (const Dataset* d : {&syn.train, &syn.dev, &syn.test}) {
    for (const auto& s : d->samples) {
      CHECK(EntropyScore(*s.counts) == 0.0);
      CHECK(s.label == syn.true_label.at(s.id));
    }
  }
}

TEST_CASE("synthesis is deterministic per seed") {
  SynthesisParams p;
  p.n = 120;
  p.seed = 11;
  const auto a = Synthesize(p);
  const auto b = Synthesize(p);
  CHECK(SerializeJsonl(a.train) == SerializeJsonl(b.train));
  CHECK(SerializeJsonl(a.test) == SerializeJsonl(b.test));
  p.seed = 12;
  CHECK(SerializeJsonl(Synthesize(p).train) != SerializeJsonl(a.train));
}

TEST_CASE("synthesis preconditions") {
  SynthesisParams p;
  p.n = 20;
  CHECK(CodeOf([&] { Synthesize(p); }) == ErrorCode::kInvalidArgument);
  p.n = 40;
  p.annotators = 2;
  CHECK(CodeOf([&] { Synthesize(p); }) == ErrorCode::kInvalidArgument);
  p.annotators = 5;
  p.num_classes = 10;
  p.dim = 10;
  CHECK(CodeOf([&] { Synthesize(p); }) == ErrorCode::kInsufficientData);
}

TEST_CASE("difficulty balanced subsample") {
  const auto syn = testing::SmallSynthetic(5, 300);
  ScoreMap scores;
  for (const auto& s : syn.train.samples) scores[s.id] = syn.latent_difficulty.at(s.id);
  const auto part = PartitionQuantile(scores, 3);
  const Dataset sub = DifficultyBalancedSubsample(syn.train, part, 10, 1);
  CHECK(sub.size() == 30);
  std::vector<int> hist(3, 0);
  std::set<SampleId> ids;
  for (const auto& s : sub.samples) {
    hist[part.group_of.at(s.id)]++;
    ids.insert(s.id);
  }
  CHECK(hist == std::vector<int>{10, 10, 10});
  CHECK(ids.size() == 30);
  CHECK(SerializeJsonl(DifficultyBalancedSubsample(syn.train, part, 10, 1)) == SerializeJsonl(sub));
  const auto sizes = part.GroupSizes();
  const int smallest = static_cast<int>(*std::min_element(sizes.begin(), sizes.end()));
  CHECK(CodeOf([&] { DifficultyBalancedSubsample(syn.train, part, smallest + 1, 1); }) ==
        ErrorCode::kInsufficientData);
}

TEST_CASE("describe dataset") {
  const auto syn = testing::SmallSynthetic();
  const std::string text = DescribeDataset(syn.train);
  CHECK(text.find("samples: " + std::to_string(syn.train.size())) != std::string::npos);
  CHECK(text.find("classes: 3") != std::string::npos);
}
