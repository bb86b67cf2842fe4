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


#include <cmath>
#include <filesystem>
#include <functional>

#include "curdisc/error.hpp"
#include "curdisc/harness.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace curdisc;
namespace fs = std::filesystem;

namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

fs::path WriteSplits(const testing::TempDir& dir, const std::string& name, std::uint64_t seed,
                     int n = 240) {
  const auto s = testing::SmallSynthetic(seed, n);
  const auto path = dir / name;
  SaveDataDir({s.train, s.dev, s.test}, path);
  return path;
}

}  // namespace

TEST_CASE("key value parsing") {
  const auto kv = KeyValueConfig::Parse(
      "# comment\nname = run1\n  k=4   # trailing\n\nseeds = 1, 2 ,3\nflag = yes\nlr = 0.5\n");
  CHECK(kv.Get("name", "") == "run1");
  CHECK(kv.GetInt("k", 0) == 4);
  CHECK(kv.GetReal("lr", 0.0) == 0.5);
  CHECK(kv.GetBool("flag", false));
  CHECK(kv.GetSeeds("seeds", {}) == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(kv.Get("missing", "x") == "x");
  CHECK(CodeOf([&] { kv.Require("missing"); }) != ErrorCode::kInternal);
  CHECK(CodeOf([] { KeyValueConfig::Parse("just words\n"); }) == ErrorCode::kParse);
  CHECK(CodeOf([] { KeyValueConfig::Parse("k = four\n").GetInt("k", 0); }) == ErrorCode::kParse);
  CHECK(CodeOf([] { ParseSeedList("1,x"); }) == ErrorCode::kParse);
}

TEST_CASE("experiment config defaults") {
  const auto c = ExperimentConfig::FromKeyValue(KeyValueConfig::Parse("data_dir = d\n"), "/base");
  CHECK(c.data_dir == fs::path("/base/d"));
  CHECK(c.k == 3);
  CHECK(c.difficulty == DifficultyMethod::kEntropy);
  CHECK(c.partition == PartitionMethod::kQuantile);
  CHECK(c.trainer.strategy.kind == StrategyKind::kCurriculum);
  CHECK(c.trainer.optimizer == OptimizerKind::kAdam);
  CHECK(c.trainer.learning_rate == 1e-2);
  CHECK(c.trainer.batch_size == 16);
  CHECK(c.trainer.epochs == 10);
  CHECK(c.seeds.size() == 5);
  CHECK(CodeOf([] { ExperimentConfig::FromKeyValue(KeyValueConfig::Parse("k = 3\n")); }) !=
        ErrorCode::kInternal);
}

TEST_CASE("mean and standard error") {
  const auto m = ComputeMeanStderr({0.70, 0.71, 0.72, 0.73, 0.74});
  CHECK(m.mean == doctest::Approx(0.72).epsilon(1e-12));
  CHECK(m.stderr_ == doctest::Approx(0.0070710678).epsilon(1e-8));
  CHECK(ComputeMeanStderr({0.5}).stderr_ == 0.0);
  CHECK(ComputeMeanStderr({0.5}).mean == 0.5);
}

TEST_CASE("row normalization") {
  const auto n = RowNormalize({{0.70, 0.80}, {0.5}, {0.3, 0.9, 0.6}});
  CHECK(n[0][0] == doctest::Approx(87.5));
  CHECK(n[0][1] == 100.0);
  CHECK(n[1][0] == 100.0);
  CHECK(n[2][0] < n[2][2]);
  CHECK(n[2][2] < n[2][1]);
  CHECK(CodeOf([] { RowNormalize({{0.0, 0.0}}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("summary csv") {
  SummaryRow row;
  row.name = "inc";
  row.n = 2;
  row.dev = {0.5, 0.25};
  row.test = {0.75, 0.125};
  CHECK(SummaryCsv({row}) ==
        "name,n,mean_dev,stderr_dev,mean_test,stderr_test\ninc,2,0.5,0.25,0.75,0.125\n");
}

TEST_CASE("experiment run writes a recomputable summary") {
  testing::TempDir dir;
  const auto data = WriteSplits(dir, "data", 6);
  testing::WriteText(dir / "exp.txt",
                     "name = smoke\ndata_dir = data\nepochs = 2\nseeds = 1,2,3\nthreads = 2\n");
  const auto result = RunExperimentFile(dir / "exp.txt", dir / "out");
  CHECK(result.reports.size() == 3);
  for (const char* f : {"config.txt", "seeds.txt", "curriculum.json", "summary.csv", "digest.txt",
                        "seed_1/report.json", "seed_1/curve.csv", "seed_1/weights.csv",
                        "seed_3/groups.csv"}) {
    CHECK_MESSAGE(fs::exists(dir / "out" / f), f);
  }
  const std::string summary = testing::ReadText(dir / "out" / "summary.csv");
  CHECK(summary == result.summary_csv);
  CHECK(summary.find("\nsmoke,3,") != std::string::npos);
  CHECK(SummarizeRunDir(dir / "out") == summary);
  CHECK(testing::ReadText(dir / "out" / "seeds.txt") == "1\n2\n3\n");

  const auto again = RunExperimentFile(dir / "exp.txt", dir / "out2");
  CHECK(testing::ReadText(dir / "out2" / "summary.csv") == summary);
  CHECK(testing::ReadText(dir / "out2" / "digest.txt") ==
        testing::ReadText(dir / "out" / "digest.txt"));
}

TEST_CASE("experiment with a baseline strategy") {
  testing::TempDir dir;
  WriteSplits(dir, "data", 6);
  testing::WriteText(dir / "exp.txt",
                     "data_dir = data\nepochs = 2\nseeds = 1\nstrategy = spl\n");
  RunExperimentFile(dir / "exp.txt", dir / "out");
  CHECK(!fs::exists(dir / "out" / "curriculum.json"));
  CHECK(fs::exists(dir / "out" / "summary.csv"));
}

TEST_CASE("missing data directory") {
  ExperimentConfig c;
  c.data_dir = "/nonexistent/curdisc";
  CHECK(CodeOf([&] { RunExperiment(c, {}); }) == ErrorCode::kIo);
}

TEST_CASE("sweep over k") {
  testing::TempDir dir;
  const auto s = testing::SmallSynthetic(8, 300);
  const DataSplits data{s.train, s.dev, s.test};
  TrainerConfig cfg;
  cfg.epochs = 2;
  const auto rows = SweepK(data, DifficultyMethod::kEntropy, PartitionMethod::kKMeans, {3, 6, 12},
                           cfg, {1, 2}, dir / "sweep", 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].k == 3);
  CHECK(rows[2].k == 12);
  for (const auto& r : rows) CHECK(r.summary.n == 2);
  const std::string csv = testing::ReadText(dir / "sweep" / "sweep.csv");
  CHECK(csv.rfind("k,n,mean_dev,stderr_dev,mean_test,stderr_test\n3,2,", 0) == 0);
  CHECK(SummarizeSweepDir(dir / "sweep") == csv);
  CHECK(CodeOf([&] {
          SweepK(data, DifficultyMethod::kEntropy, PartitionMethod::kQuantile, {1}, cfg, {1});
        }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("transfer matrix") {
  testing::TempDir dir;
  WriteSplits(dir, "a", 1);
  WriteSplits(dir, "b", 2);
  SaveCurriculum(Preset("anti", 3), dir / "anti.json");
  testing::WriteText(dir / "transfer.txt",
                     "curricula = inc:inc, anti:anti.json\n"
                     "targets = a:a, b:b:mlp8\n"
                     "epochs = 2\nseeds = 1,2\n");
  const auto r = RunTransferFile(dir / "transfer.txt", dir / "out");
  CHECK(r.rows == std::vector<std::string>{"a", "b"});
  CHECK(r.columns == std::vector<std::string>{"inc", "anti"});
  for (const auto& row : r.normalized) {
    CHECK(std::max(row[0], row[1]) == 100.0);
  }
  const std::string raw = testing::ReadText(dir / "out" / "transfer_raw.csv");
  CHECK(raw == MatrixCsv(r, false));
  CHECK(raw.rfind("target,inc,anti\na,", 0) == 0);
  CHECK(fs::exists(dir / "out" / "transfer_normalized.csv"));
  CHECK(fs::exists(dir / "out" / "digest.txt"));

  TransferTarget t;
  t.name = "x";
  t.partition.k = 3;
  CHECK(CodeOf([&] { TransferMatrix({{"two", Preset("inc", 2)}}, {t}, {1}); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("curriculum resolution") {
  testing::TempDir dir;
  CHECK(ResolveCurriculum("inc", 4, false) == Preset("inc", 4));
  CHECK(ResolveCurriculum("constant", 2, true).non_monotonic);
  SaveCurriculum(Preset("anti", 3), dir / "c.json");
  CHECK(ResolveCurriculum((dir / "c.json").string(), 3, false).per_group ==
        Preset("anti", 3).per_group);
  CHECK(CodeOf([&] { ResolveCurriculum((dir / "c.json").string(), 4, false); }) ==
        ErrorCode::kInvalidArgument);
}
