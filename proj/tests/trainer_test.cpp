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
#include <functional>

#include "curdisc/difficulty.hpp"
#include "curdisc/error.hpp"
#include "curdisc/trainer.hpp"
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

struct Fixture {
  SynthesisResult data = testing::SmallSynthetic(5, 300);
  DifficultyPartition partition = PartitionQuantile(EntropyScores(data.train), 3);
  TrainerConfig cfg;
  Fixture() { cfg.epochs = 4; }
};

}  // namespace

TEST_CASE("evaluation cadence") {
  Fixture f;
  f.cfg.epochs = 10;
  const auto inc = Preset("inc", 3);
  TrainOptions opt;
  opt.record_loss_snapshots = true;
  const auto r = Train(f.data.train, &f.data.dev, &f.data.test, &f.partition, f.cfg, &inc, opt);
  CHECK(r.curve.size() == 20);
  CHECK(r.loss_snapshots.size() == 20);
  CHECK(r.loss_snapshots.front().size() == f.data.train.size());
  CHECK(r.curve.back().t == 1.0);
  for (std::size_t e = 1; e < r.curve.size(); ++e) CHECK(r.curve[e].t > r.curve[e - 1].t);
  REQUIRE(r.group_weight_trajectory.size() == 3);
  for (const auto& row : r.group_weight_trajectory) CHECK(row.size() == 20);
  CHECK(r.partition_history.size() == 20);
}

TEST_CASE("runs are deterministic") {
  Fixture f;
  const auto inc = Preset("inc", 3);
  const auto a = Train(f.data.train, f.data.dev, f.data.test, f.partition, f.cfg, inc);
  const auto b = Train(f.data.train, f.data.dev, f.data.test, f.partition, f.cfg, inc);
  CHECK(ReportDigest(a) == ReportDigest(b));
  CHECK(a.final_params == b.final_params);
  f.cfg.seed = 1;
  const auto c = Train(f.data.train, f.data.dev, f.data.test, f.partition, f.cfg, inc);
  CHECK(ReportDigest(a) != ReportDigest(c));
}

TEST_CASE("constant half weight under sgd equals half the learning rate") {
  Fixture f;
  f.cfg.optimizer = OptimizerKind::kSgd;
  f.cfg.epochs = 2;
  const auto constant = Preset("constant", 3);
  std::vector<std::vector<double>> weighted, plain;
  TrainOptions wopt, popt;
  wopt.on_step = [&](long, std::span<const double> p) { weighted.emplace_back(p.begin(), p.end()); };
  popt.on_step = [&](long, std::span<const double> p) { plain.emplace_back(p.begin(), p.end()); };

  TrainerConfig wc = f.cfg;
  wc.learning_rate = 0.02;
  wc.strategy.kind = StrategyKind::kCurriculum;
  Train(f.data.train, nullptr, nullptr, &f.partition, wc, &constant, wopt);
  TrainerConfig pc = f.cfg;
  pc.learning_rate = 0.01;
  Train(f.data.train, nullptr, nullptr, &f.partition, pc, nullptr, popt);

  REQUIRE(weighted.size() == plain.size());
  REQUIRE(!weighted.empty());
  double worst = 0.0;
  for (std::size_t s = 0; s < weighted.size(); ++s) {
    for (std::size_t i = 0; i < weighted[s].size(); ++i) {
      const double d = std::abs(weighted[s][i] - plain[s][i]);
      worst = std::max(worst, d / std::max(1e-12, std::abs(plain[s][i])));
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("test accuracy comes from the best dev checkpoint") {
  Fixture f;
  f.cfg.strategy.kind = StrategyKind::kCurriculum;
  const auto inc = Preset("inc", 3);
  const auto r = Train(f.data.train, f.data.dev, f.data.test, f.partition, f.cfg, inc);
  double best = -1.0;
  int arg = -1;
  for (std::size_t e = 0; e < r.curve.size(); ++e) {
    if (r.curve[e].dev_accuracy > best) {
      best = r.curve[e].dev_accuracy;
      arg = static_cast<int>(e);
    }
  }
  CHECK(r.best_dev_accuracy == best);
  CHECK(r.best_eval == arg);
  const auto spec = ResolveModel(f.cfg.model, f.data.train);
  CHECK(Accuracy(spec, r.best_params, f.data.dev) == best);
  CHECK(Accuracy(spec, r.best_params, f.data.test) == r.test_accuracy);
}

TEST_CASE("no dev set keeps the final parameters") {
  Fixture f;
  const auto r = Train(f.data.train, nullptr, &f.data.test, nullptr, f.cfg, nullptr);
  CHECK(std::isnan(r.best_dev_accuracy));
  CHECK(r.best_params == r.final_params);
  CHECK(r.group_weight_trajectory.empty());
}

TEST_CASE("divergence is reported") {
  Fixture f;
  f.cfg.optimizer = OptimizerKind::kSgd;
  f.cfg.learning_rate = 1e308;
  CHECK(CodeOf([&] { Train(f.data.train, nullptr, nullptr, nullptr, f.cfg, nullptr); }) ==
        ErrorCode::kDiverged);
}

TEST_CASE("bad configurations") {
  Fixture f;
  const auto inc2 = Preset("inc", 2);
  TrainerConfig c = f.cfg;
  c.strategy.kind = StrategyKind::kCurriculum;
  CHECK(CodeOf([&] { Train(f.data.train, nullptr, nullptr, &f.partition, c, &inc2); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(CodeOf([&] { Train(f.data.train, nullptr, nullptr, nullptr, c, &inc2); }) ==
        ErrorCode::kInvalidArgument);
  c = f.cfg;
  c.batch_size = 0;
  CHECK(CodeOf([&] { Train(f.data.train, nullptr, nullptr, nullptr, c, nullptr); }) ==
        ErrorCode::kInvalidArgument);
  c = f.cfg;
  c.eval_every = 0.0;
  CHECK(CodeOf([&] { Train(f.data.train, nullptr, nullptr, nullptr, c, nullptr); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("report serialization") {
  Fixture f;
  f.cfg.strategy.kind = StrategyKind::kCurriculum;
  const auto inc = Preset("inc", 3);
  const auto r = Train(f.data.train, f.data.dev, f.data.test, f.partition, f.cfg, inc);
  const auto back = ReportFromJson(ReportToJson(r));
  CHECK(ReportToJson(back) == ReportToJson(r));
  CHECK(back.curve == r.curve);
  CHECK(back.final_partition.group_of == r.final_partition.group_of);
  CHECK(CurveCsv(r).rfind("eval,t,train_loss,dev_accuracy\n0,", 0) == 0);
  CHECK(GroupWeightCsv(r).rfind("eval,group0,group1,group2\n0,", 0) == 0);
  CHECK(CodeOf([] { ReportFromJson("{\"seed\": 1}"); }) == ErrorCode::kParse);
}

TEST_CASE("curriculum weights follow the schedule") {
  Fixture f;
  f.cfg.strategy.kind = StrategyKind::kCurriculum;
  const auto inc = Preset("inc", 3);
  const auto r = Train(f.data.train, f.data.dev, f.data.test, f.partition, f.cfg, inc);
  // Early on the easy group dominates, at the end all weights are high.
  CHECK(r.group_weight_trajectory[0].front() > r.group_weight_trajectory[2].front());
  for (const auto& row : r.group_weight_trajectory) CHECK(row.back() > 0.5);
}

TEST_CASE("non-monotonic training moves samples") {
  Fixture f;
  f.cfg.strategy.kind = StrategyKind::kCurriculum;
  auto inc = Preset("inc", 3);
  const auto still = Train(f.data.train, f.data.dev, f.data.test, f.partition, f.cfg, inc);
  for (const auto& p : still.partition_history) CHECK(p.group_of == f.partition.group_of);

  inc.non_monotonic = true;
  const auto moving = Train(f.data.train, f.data.dev, f.data.test, f.partition, f.cfg, inc);
  CHECK(moving.partition_history.size() == moving.curve.size());
  bool changed = false;
  for (const auto& p : moving.partition_history) changed |= p.group_of != f.partition.group_of;
  CHECK(changed);

  // Some sample's weight goes down and then up again.
  bool non_monotone = false;
  for (const auto& [id, g0] : f.partition.group_of) {
    std::vector<double> w;
    int g = g0;
    for (std::size_t e = 0; e < moving.curve.size(); ++e) {
      w.push_back(GlfWeight(moving.curve[e].t, inc.per_group[static_cast<std::size_t>(g)]));
      g = moving.partition_history[e].group_of.at(id);
    }
    bool down = false;
    for (std::size_t e = 1; e < w.size(); ++e) {
      if (w[e] < w[e - 1] - 1e-9) down = true;
    }
    bool up_after_down = false;
    bool seen_down = false;
    for (std::size_t e = 1; e < w.size(); ++e) {
      if (w[e] < w[e - 1] - 1e-9) seen_down = true;
      if (seen_down && w[e] > w[e - 1] + 1e-9) up_after_down = true;
    }
    if (down && up_after_down) non_monotone = true;
  }
  CHECK(non_monotone);
}

TEST_CASE("baseline strategies train") {
  Fixture f;
  for (auto kind : {StrategyKind::kSpl, StrategyKind::kSuperLoss, StrategyKind::kDp,
                    StrategyKind::kHardMining}) {
    TrainerConfig c = f.cfg;
    c.strategy.kind = kind;
    const auto r = Train(f.data.train, &f.data.dev, &f.data.test, &f.partition, c, nullptr);
    CHECK(r.best_dev_accuracy > 1.0 / 3.0);
    for (const auto& row : r.group_weight_trajectory) {
      for (double v : row) {
        CHECK(v >= 0.0);
        if (kind != StrategyKind::kSuperLoss) CHECK(v <= 1.0 + 1e-12);
      }
    }
  }
}
