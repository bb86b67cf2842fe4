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
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>

#include "curdisc/error.hpp"
#include "curdisc/log.hpp"
#include "curdisc/rng.hpp"
#include "curdisc/search.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace curdisc;

namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

bool OnGrid(const std::vector<double>& grid, double v) {
  return std::find(grid.begin(), grid.end(), v) != grid.end();
}

TrialRecord Record(std::int64_t id, const Assignment& a, double objective) {
  TrialRecord r;
  r.trial_id = id;
  r.assignment = a;
  r.seeds = {1};
  r.per_seed_dev_acc = {objective};
  r.objective = objective;
  return r;
}

// Cheap objective peaked at rate 2, shift 0.25 for every group.
TrialEvaluator Surrogate(std::atomic<int>* calls = nullptr) {
  return [calls](const Assignment& a, std::span<const std::uint64_t> seeds) {
    if (calls) ++*calls;
    double v = 0.0;
    for (const auto& p : a) v -= (p.rate - 2.0) * (p.rate - 2.0) + (p.shift - 0.25) * (p.shift - 0.25);
    return std::vector<double>(seeds.size(), v);
  };
}

}  // namespace

TEST_CASE("default space") {
  const auto s = SearchSpace::Default(3);
  CHECK(s.rate_grid.size() == 11);
  CHECK(s.shift_grid.size() == 9);
  CHECK(s.rate_grid.front() == -10.0);
  CHECK(s.rate_grid.back() == 10.0);
  CHECK(s.shift_grid.front() == -0.5);
  CHECK(s.shift_grid.back() == 1.5);
  CHECK(s.Dimensions() == 6);
}

TEST_CASE("suggestions stay on the grid") {
  const auto space = SearchSpace::Default(3);
  std::vector<TrialRecord> history;
  for (int i = 0; i < 40; ++i) {
    const auto a = Suggest(history, space, DeriveSeed(9, i));
    REQUIRE(a.size() == 3);
    for (const auto& p : a) {
      CHECK(OnGrid(space.rate_grid, p.rate));
      CHECK(OnGrid(space.shift_grid, p.shift));
    }
    history.push_back(Record(i, a, -std::abs(a[0].rate)));
  }
}

TEST_CASE("empty history gives the random point") {
  const auto space = SearchSpace::Default(2);
  CHECK(Suggest({}, space, 17) == RandomAssignment(space, 17));
  CHECK(RandomAssignment(space, 17) != RandomAssignment(space, 18));
}

TEST_CASE("tpe densities") {
  const auto space = SearchSpace::Default(3);
  std::vector<TrialRecord> history;
  for (int i = 0; i < 30; ++i) {
    const auto a = RandomAssignment(space, DeriveSeed(4, i));
    history.push_back(Record(i, a, a[0].rate));
  }
  const auto m = FitTpe(history, space);
  CHECK(m.n_good >= 8);  // ceil(0.25 * 30) plus boundary ties
  CHECK(m.n_good + m.n_bad == 30);
  for (std::size_t d = 0; d < space.Dimensions(); ++d) {
    double lsum = 0.0, gsum = 0.0;
    for (double v : m.good[d]) {
      CHECK(v > 0.0);
      lsum += v;
    }
    for (double v : m.bad[d]) gsum += v;
    CHECK(std::abs(lsum - 1.0) < 1e-12);
    CHECK(std::abs(gsum - 1.0) < 1e-12);
  }
  // High easy-group rates define the good set.
  CHECK(m.good[0].back() > m.bad[0].back());
  CHECK(m.good[0].front() < m.bad[0].front());
}

TEST_CASE("tpe favours the winning value") {
  const auto space = SearchSpace::Default(3);
  std::vector<TrialRecord> history;
  for (int i = 0; i < 20; ++i) {
    auto a = RandomAssignment(space, DeriveSeed(5, i));
    const bool win = i % 4 == 0;
    if (win) a[0].rate = 10.0;
    else if (a[0].rate == 10.0) a[0].rate = -10.0;
    history.push_back(Record(i, a, win ? 1.0 : 0.0));
  }
  int hits = 0;
  const int draws = 1000;
  for (int i = 0; i < draws; ++i) {
    if (Suggest(history, space, DeriveSeed(77, i))[0].rate == 10.0) ++hits;
  }
  CHECK(static_cast<double>(hits) / draws > 2.0 / 11.0);
}

TEST_CASE("suggestions skip evaluated points") {
  const auto space = SearchSpace::Default(1);
  std::vector<TrialRecord> history;
  for (int i = 0; i < 60; ++i) {
    const auto a = Suggest(history, space, DeriveSeed(3, i));
    for (const auto& r : history) CHECK(r.assignment != a);
    history.push_back(Record(i, a, -std::abs(a[0].rate - 2.0)));
  }
}

TEST_CASE("trial objective is the seed mean") {
  TrialEvaluator eval = [](const Assignment&, std::span<const std::uint64_t> seeds) {
    std::vector<double> out;
    const double accs[] = {0.70, 0.72, 0.74};
    for (std::size_t i = 0; i < seeds.size(); ++i) out.push_back(accs[i]);
    return out;
  };
  const std::uint64_t seeds[] = {1, 2, 3};
  const auto r = RunTrial(4, RandomAssignment(SearchSpace::Default(3), 1), eval, seeds, nullptr);
  CHECK(r.status == TrialStatus::kComplete);
  CHECK(r.objective == doctest::Approx(0.72).epsilon(1e-12));
  CHECK(r.per_seed_dev_acc.size() == 3);
  CHECK(!r.started_at.empty());
}

TEST_CASE("diverged trials fail and never win") {
  TrialEvaluator boom = [](const Assignment&, std::span<const std::uint64_t>) -> std::vector<double> {
    Fail(ErrorCode::kDiverged, "nan");
  };
  const std::uint64_t seeds[] = {1};
  const auto space = SearchSpace::Default(2);
  auto bad = RunTrial(0, RandomAssignment(space, 1), boom, seeds, nullptr);
  CHECK(bad.status == TrialStatus::kFailed);
  CHECK(bad.objective == -std::numeric_limits<double>::infinity());
  CHECK(bad.error == "nan");
  auto good = Record(1, RandomAssignment(space, 2), 0.1);
  CHECK(Incumbent({bad, good}).trial_id == 1);
  CHECK(CodeOf([&] { Incumbent({bad}); }) == ErrorCode::kInsufficientData);
  CHECK(RankTrials({bad, good}).size() == 1);

  TrialEvaluator other = [](const Assignment&, std::span<const std::uint64_t>) -> std::vector<double> {
    Fail(ErrorCode::kIo, "disk");
  };
  CHECK(CodeOf([&] { RunTrial(0, RandomAssignment(space, 1), other, seeds, nullptr); }) ==
        ErrorCode::kIo);
}

TEST_CASE("incumbent prefers the earliest tie") {
  const auto space = SearchSpace::Default(2);
  const std::vector<TrialRecord> h = {Record(0, RandomAssignment(space, 1), 0.5),
                                      Record(1, RandomAssignment(space, 2), 0.7),
                                      Record(2, RandomAssignment(space, 3), 0.7)};
  CHECK(Incumbent(h).trial_id == 1);
}

TEST_CASE("trial record json") {
  auto r = Record(3, {{2.0, 0.25}, {-4.0, 1.5}}, 0.625);
  r.started_at = "2026-01-01T00:00:00Z";
  const auto back = TrialFromJson(TrialToJson(r));
  CHECK(back.trial_id == 3);
  CHECK(back.assignment == r.assignment);
  CHECK(back.objective == 0.625);
  CHECK(back.started_at == r.started_at);

  TrialRecord failed = r;
  failed.status = TrialStatus::kFailed;
  failed.objective = -std::numeric_limits<double>::infinity();
  failed.per_seed_dev_acc.clear();
  failed.error = "diverged";
  const std::string text = TrialToJson(failed);
  CHECK(text.find("\"objective\":null") != std::string::npos);
  const auto fb = TrialFromJson(text);
  CHECK(fb.status == TrialStatus::kFailed);
  CHECK(std::isinf(fb.objective));
  CHECK(fb.error == "diverged");

  CHECK(CodeOf([] { TrialFromJson("{"); }) == ErrorCode::kParse);
  CHECK(CodeOf([] { TrialFromJson("{\"trial_id\":1}"); }) == ErrorCode::kParse);
}

TEST_CASE("store appends and skips corrupt lines") {
  testing::TempDir dir;
  const auto path = dir / "trials.jsonl";
  {
    TrialStore store(path);
    store.Append(Record(0, {{2.0, 0.25}}, 0.5));
    store.Append(Record(1, {{4.0, 0.5}}, 0.6));
  }
  std::string text = testing::ReadText(path);
  testing::WriteText(path, text + "{\"trial_id\": 2, \"assig\n");
  TrialStore store(path);
  ScopedWarningCapture warnings;
  const auto loaded = store.Load();
  CHECK(loaded.size() == 2);
  CHECK(loaded[1].objective == 0.6);
  CHECK(warnings.Contains("trials.jsonl:3"));

  TrialStore memory;
  memory.Append(Record(0, {{2.0, 0.25}}, 0.5));
  CHECK(memory.Load().size() == 1);
  CHECK(TrialStore(dir / "missing.jsonl").Load().empty());
}

TEST_CASE("discovery finds good points and is reproducible") {
  const auto space = SearchSpace::Default(2);
  DiscoverOptions opt;
  opt.budget = 60;
  opt.seeds = {1};
  opt.master_seed = 11;
  const auto a = Discover(space, Surrogate(), opt);
  const auto b = Discover(space, Surrogate(), opt);
  CHECK(a.history.size() == 60);
  CHECK(a.incumbent.trial_id == b.incumbent.trial_id);
  CHECK(a.best == b.best);
  CHECK(a.best.name == "sp");
  CHECK(a.best.k == 2);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].trial_id == static_cast<std::int64_t>(i));
    CHECK(a.history[i].assignment == b.history[i].assignment);
  }
  double best_random = -1e9;
  for (const auto& r : a.history) {
    if (r.trial_id < 10) best_random = std::max(best_random, r.objective);
  }
  CHECK(a.incumbent.objective >= best_random);
}

TEST_CASE("resume never re-runs committed trials") {
  testing::TempDir dir;
  const auto space = SearchSpace::Default(2);
  DiscoverOptions opt;
  opt.budget = 30;
  opt.seeds = {1};
  const auto full = Discover(space, Surrogate(), opt);

  std::atomic<int> calls{0};
  TrialStore store(dir / "t.jsonl");
  opt.budget = 15;
  Discover(space, Surrogate(&calls), opt, &store);
  CHECK(calls == 15);
  opt.budget = 30;
  const auto resumed = Discover(space, Surrogate(&calls), opt, &store);
  CHECK(calls == 30);
  CHECK(store.Load().size() == 30);
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(resumed.history[i].assignment == full.history[i].assignment);
  }
  CHECK(resumed.incumbent.trial_id == full.incumbent.trial_id);
  Discover(space, Surrogate(&calls), opt, &store);
  CHECK(calls == 30);
}

TEST_CASE("budget limits") {
  const auto space = SearchSpace::Default(2);
  DiscoverOptions opt;
  opt.seeds = {1};
  opt.budget = 10;
  const auto r = Discover(space, Surrogate(), opt);
  double best = -1e9;
  for (int i = 0; i < 10; ++i) {
    const auto a = RandomAssignment(space, DeriveSeed(opt.master_seed, i));
    CHECK(r.history[static_cast<std::size_t>(i)].assignment == a);
    best = std::max(best, r.history[static_cast<std::size_t>(i)].objective);
  }
  CHECK(r.incumbent.objective == best);
  opt.budget = 9;
  CHECK(CodeOf([&] { Discover(space, Surrogate(), opt); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("random sampler") {
  const auto space = SearchSpace::Default(2);
  DiscoverOptions opt;
  opt.seeds = {1};
  opt.budget = 20;
  opt.sampler = Sampler::kRandom;
  const auto r = Discover(space, Surrogate(), opt);
  for (int i = 0; i < 20; ++i) {
    CHECK(r.history[static_cast<std::size_t>(i)].assignment ==
          RandomAssignment(space, DeriveSeed(0, i)));
  }
}

TEST_CASE("top curricula summary") {
  const auto space = SearchSpace::Default(2);
  std::vector<TrialRecord> h;
  for (int i = 0; i < 12; ++i) {
    h.push_back(Record(i, RandomAssignment(space, DeriveSeed(8, i)), 0.01 * i));
  }
  const auto one = TopCurriculaSummary(h, 1, 11);
  CHECK(one.t.size() == 11);
  for (std::size_t g = 0; g < 2; ++g) {
    for (std::size_t i = 0; i < one.t.size(); ++i) {
      CHECK(one.lo[g][i] == one.hi[g][i]);
      CHECK(one.mean[g][i] == GlfWeight(one.t[i], h[11].assignment[g]));
    }
  }
  const auto five = TopCurriculaSummary(h, 5, 11);
  for (std::size_t i = 0; i < five.t.size(); ++i) {
    double mean = 0.0;
    for (int m = 7; m < 12; ++m) mean += GlfWeight(five.t[i], h[m].assignment[0]);
    mean /= 5.0;
    CHECK(five.mean[0][i] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(five.lo[0][i] <= five.mean[0][i]);
    CHECK(five.hi[0][i] >= five.mean[0][i]);
  }
  CHECK(CodeOf([&] { TopCurriculaSummary(h, 13); }) == ErrorCode::kInsufficientData);
  const std::string csv = CurveBandCsv(one);
  CHECK(csv.rfind("t,group,mean,lo,hi\n0,0,", 0) == 0);
}

TEST_CASE("ranking csv") {
  const std::vector<TrialRecord> h = {Record(0, {{2.0, 0.25}}, 0.5), Record(1, {{4.0, 0.5}}, 0.75)};
  CHECK(TrialRankingCsv(h) == "rank,trial_id,objective,r0,s0\n1,1,0.75,4,0.5\n2,0,0.5,2,0.25\n");
}

TEST_CASE("training evaluator") {
  const auto data = testing::SmallSynthetic(2, 200);
  const auto part = PartitionQuantile(EntropyScores(data.train), 2);
  TrainerConfig cfg;
  cfg.epochs = 2;
  const auto eval = TrainingEvaluator(data.train, data.dev, part, cfg, false, 2);
  const std::uint64_t seeds[] = {1, 2, 3};
  const auto accs = eval({{2.0, 0.25}, {4.0, 0.5}}, seeds);
  REQUIRE(accs.size() == 3);
  const auto serial = TrainingEvaluator(data.train, data.dev, part, cfg, false, 1)(
      {{2.0, 0.25}, {4.0, 0.5}}, seeds);
  CHECK(accs == serial);
  for (double a : accs) CHECK(a > 0.3);
}
