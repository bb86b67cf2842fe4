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

#include "curdisc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "curdisc/digest.hpp"
#include "curdisc/dynamics.hpp"
#include "curdisc/error.hpp"
#include "curdisc/format.hpp"
#include "curdisc/json_io.hpp"
#include "curdisc/rng.hpp"

namespace curdisc {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Optimizer step counts after which an evaluation happens.
std::vector<long> EvalBoundaries(long steps_per_epoch, int epochs, double eval_every) {
  const long total = steps_per_epoch * epochs;
  const long n_evals = static_cast<long>(std::floor(epochs / eval_every + 1e-9));
  std::vector<long> out;
  for (long j = 1; j <= n_evals; ++j) {
    long step = std::lround(static_cast<double>(j) * eval_every *
                            static_cast<double>(steps_per_epoch));
    step = std::clamp(step, 1L, total);
    if (out.empty() || step > out.back()) out.push_back(step);
  }
  if (out.empty() || out.back() != total) out.push_back(total);
  return out;
}

double MedianNearestRank(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t rank = (v.size() + 1) / 2;  // ceil(0.5 n)
  return v[rank - 1];
}

// Per-run mutable state of the weighting strategy.
class WeightAssigner {
 public:
  WeightAssigner(const WeightingStrategy& strategy, const Dataset& train,
                 const CurriculumConfig* curriculum)
      : strategy_(strategy), curriculum_(curriculum) {
    strategy_.Validate();
    if (strategy_.kind == StrategyKind::kCurriculum) {
      Require(curriculum != nullptr, "curriculum strategy needs a curriculum");
      curriculum->Validate();
    }
    if (strategy_.kind == StrategyKind::kSuperLoss) {
      ema_tau_ = std::log(static_cast<double>(train.num_classes));
    }
    if (strategy_.kind == StrategyKind::kDp) {
      difficulty_.reserve(train.size());
      for (const auto& s : train.samples) difficulty_.push_back(DpDifficulty(s));
      if (std::isnan(strategy_.tau)) strategy_.tau = MedianNearestRank(difficulty_);
      Require(strategy_.tau < 1.0, "DP threshold must be < 1");
    }
  }

  // `index` are positions in the training set, `groups` their current groups.
  void Assign(double t, std::span<const std::size_t> index, std::span<const int> groups,
              std::span<const double> losses, std::vector<double>& weights) {
    const std::size_t B = losses.size();
    weights.assign(B, 1.0);
    switch (strategy_.kind) {
      case StrategyKind::kNone:
        break;
      case StrategyKind::kCurriculum:
        for (std::size_t i = 0; i < B; ++i) {
          const int g = groups[i];
          if (g < 0 || g >= curriculum_->k) {
            Fail(ErrorCode::kOutOfRange, "sample group outside curriculum");
          }
          weights[i] = GlfWeight(t, curriculum_->per_group[static_cast<std::size_t>(g)]);
        }
        break;
      case StrategyKind::kSpl: {
        const double lambda = strategy_.lambda * (1.0 + strategy_.spl_growth * t);
        for (std::size_t i = 0; i < B; ++i) weights[i] = SplWeight(losses[i], lambda);
        break;
      }
      case StrategyKind::kSuperLoss: {
        double mean = 0.0;
        for (std::size_t i = 0; i < B; ++i) {
          weights[i] = SuperLossSigma(losses[i], ema_tau_, strategy_.lambda);
          mean += losses[i];
        }
        mean /= static_cast<double>(B);
        ema_tau_ = strategy_.ema_decay * ema_tau_ + (1.0 - strategy_.ema_decay) * mean;
        break;
      }
      case StrategyKind::kDp:
        for (std::size_t i = 0; i < B; ++i) {
          weights[i] = DpWeight(difficulty_[index[i]], strategy_.alpha, strategy_.tau);
        }
        break;
      case StrategyKind::kHardMining:
        for (std::size_t i = 0; i < B; ++i) weights[i] = HardMiningWeight(losses[i], losses);
        break;
    }
  }

 private:
  WeightingStrategy strategy_;
  const CurriculumConfig* curriculum_;
  double ema_tau_ = 0.0;
  std::vector<double> difficulty_;
};

std::vector<double> FullPassLosses(const ModelSpec& spec, std::span<const double> params,
                                   std::span<const Example> examples) {
  BatchPass pass(spec);
  const auto losses = pass.Forward(params, examples);
  return {losses.begin(), losses.end()};
}

}  // namespace

void TrainerConfig::Validate() const {
  Require(learning_rate > 0.0, "learning_rate must be > 0");
  Require(batch_size >= 1, "batch_size must be >= 1");
  Require(epochs >= 1, "epochs must be >= 1");
  Require(eval_every > 0.0, "eval_every must be > 0");
  if (model.kind == ModelKind::kMlp) Require(model.hidden >= 1, "mlp needs hidden >= 1");
  strategy.Validate();
}

ModelSpec ResolveModel(const ModelSpec& model, const Dataset& data) {
  ModelSpec spec = model;
  spec.input_dim = static_cast<int>(data.dim());
  spec.num_classes = data.num_classes;
  return spec;
}

double Accuracy(const ModelSpec& spec, std::span<const double> params, const Dataset& data) {
  if (data.samples.empty()) return kNaN;
  std::size_t correct = 0;
  for (const auto& s : data.samples) {
    if (Predict(spec, params, s.features) == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainReport Train(const Dataset& train, const Dataset* dev, const Dataset* test,
                  const DifficultyPartition* partition, const TrainerConfig& cfg,
                  const CurriculumConfig* curriculum, const TrainOptions& options) {
  cfg.Validate();
  Require(!train.samples.empty(), "training set is empty");
  const ModelSpec spec = ResolveModel(cfg.model, train);
  for (const Dataset* d : {dev, test}) {
    if (d) {
      Require(d->dim() == train.dim() || d->samples.empty(),
              "dev/test feature dimension differs from train");
    }
  }

  const bool dynamics = cfg.strategy.kind == StrategyKind::kCurriculum && curriculum &&
                        curriculum->non_monotonic;
  DifficultyPartition groups_state;
  if (partition) {
    partition->Validate();
    groups_state = *partition;
    for (const auto& s : train.samples) groups_state.GroupOf(s.id);
    if (curriculum && cfg.strategy.kind == StrategyKind::kCurriculum) {
      Require(curriculum->k == partition->k,
              "curriculum k=" + std::to_string(curriculum->k) + " does not match partition k=" +
                  std::to_string(partition->k));
    }
  } else {
    Require(cfg.strategy.kind != StrategyKind::kCurriculum,
            "curriculum training needs a difficulty partition");
  }
  const int k = partition ? partition->k : 0;

  const std::size_t n = train.size();
  std::vector<Example> examples;
  examples.reserve(n);
  for (const auto& s : train.samples) examples.push_back({s.features, s.label});
  std::vector<int> group_of_index(n, 0);
  auto refresh_groups = [&]() {
    if (!partition) return;
    for (std::size_t i = 0; i < n; ++i) {
      group_of_index[i] = groups_state.group_of.at(train.samples[i].id);
    }
  };
  refresh_groups();

  const auto B = static_cast<std::size_t>(cfg.batch_size);
  const long steps_per_epoch = static_cast<long>((n + B - 1) / B);
  const long total_steps = steps_per_epoch * cfg.epochs;
  const auto boundaries = EvalBoundaries(steps_per_epoch, cfg.epochs, cfg.eval_every);

  std::vector<double> params = InitParams(spec, cfg.seed, cfg.init_scale);
  Optimizer optimizer(cfg.optimizer, cfg.learning_rate, params.size());
  WeightAssigner assigner(cfg.strategy, train, curriculum);
  BatchPass pass(spec);
  Rng shuffle_rng(DeriveSeed(cfg.seed, 0x5EED));

  TrainReport report;
  report.seed = cfg.seed;
  report.group_weight_trajectory.assign(static_cast<std::size_t>(k), {});
  report.best_dev_accuracy = -1.0;

  // Most recent training loss of every sample, seeded by a pass at init.
  std::vector<double> latest_loss = FullPassLosses(spec, params, examples);

  std::vector<std::size_t> order(n);
  std::vector<Example> batch;
  std::vector<std::size_t> batch_index;
  std::vector<int> batch_groups;
  std::vector<double> weights, grad;
  double interval_loss = 0.0;
  std::size_t interval_count = 0;
  std::vector<double> group_weight_sum(static_cast<std::size_t>(k), 0.0);
  std::vector<std::size_t> group_weight_count(static_cast<std::size_t>(k), 0);
  std::size_t next_boundary = 0;
  long step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle_rng.Shuffle(order);
    for (std::size_t begin = 0; begin < n; begin += B) {
      const std::size_t end = std::min(n, begin + B);
      const double t = static_cast<double>(step) / static_cast<double>(total_steps);
      batch.clear();
      batch_index.clear();
      batch_groups.clear();
      for (std::size_t j = begin; j < end; ++j) {
        batch.push_back(examples[order[j]]);
        batch_index.push_back(order[j]);
        batch_groups.push_back(group_of_index[order[j]]);
      }
      const auto losses = pass.Forward(params, batch);
      for (std::size_t j = 0; j < losses.size(); ++j) {
        if (!std::isfinite(losses[j])) {
          Fail(ErrorCode::kDiverged,
               "training diverged: non-finite loss at step " + std::to_string(step) +
                   " (epoch " + std::to_string(epoch) + ", sample id " +
                   std::to_string(train.samples[batch_index[j]].id) + ")");
        }
      }
      assigner.Assign(t, batch_index, batch_groups, losses, weights);
      for (std::size_t j = 0; j < losses.size(); ++j) {
        latest_loss[batch_index[j]] = losses[j];
        interval_loss += losses[j];
        ++interval_count;
        if (k > 0) {
          group_weight_sum[static_cast<std::size_t>(batch_groups[j])] += weights[j];
          ++group_weight_count[static_cast<std::size_t>(batch_groups[j])];
        }
      }
      pass.Backward(params, batch, weights, grad);
      optimizer.Step(params, grad);
      ++step;
      for (double v : params) {
        if (!std::isfinite(v)) {
          Fail(ErrorCode::kDiverged,
               "training diverged: non-finite parameter after step " + std::to_string(step));
        }
      }
      if (options.on_step) options.on_step(step, params);

      if (next_boundary < boundaries.size() && step == boundaries[next_boundary]) {
        ++next_boundary;
        EvalPoint point;
        point.t = static_cast<double>(step) / static_cast<double>(total_steps);
        point.train_loss = interval_count ? interval_loss / static_cast<double>(interval_count)
                                          : kNaN;
        point.dev_accuracy = dev ? Accuracy(spec, params, *dev) : kNaN;
        report.curve.push_back(point);
        interval_loss = 0.0;
        interval_count = 0;
        for (int g = 0; g < k; ++g) {
          const auto gi = static_cast<std::size_t>(g);
          report.group_weight_trajectory[gi].push_back(
              group_weight_count[gi] ? group_weight_sum[gi] / static_cast<double>(group_weight_count[gi])
                                     : kNaN);
          group_weight_sum[gi] = 0.0;
          group_weight_count[gi] = 0;
        }
        if (options.record_loss_snapshots) {
          report.loss_snapshots.push_back(FullPassLosses(spec, params, examples));
        }
        if (dev && point.dev_accuracy > report.best_dev_accuracy) {
          report.best_dev_accuracy = point.dev_accuracy;
          report.best_eval = static_cast<int>(report.curve.size()) - 1;
          report.best_params = params;
        }
        if (dynamics) {
          ScoreMap by_id;
          for (std::size_t i = 0; i < n; ++i) by_id[train.samples[i].id] = latest_loss[i];
          groups_state = Reassign(by_id, groups_state);
          refresh_groups();
        }
        if (partition) report.partition_history.push_back(groups_state);
      }
    }
  }

  report.final_params = params;
  if (!dev) {
    report.best_dev_accuracy = kNaN;
    report.best_params = params;
  }
  report.test_accuracy = test ? Accuracy(spec, report.best_params, *test) : kNaN;
  if (partition) report.final_partition = groups_state;
  return report;
}

std::string ReportToJson(const TrainReport& r) {
  nlohmann::ordered_json j;
  j["seed"] = r.seed;
  j["best_dev_accuracy"] = RealToJson(r.best_dev_accuracy);
  j["test_accuracy"] = RealToJson(r.test_accuracy);
  j["best_eval"] = r.best_eval;
  auto curve = nlohmann::ordered_json::array();
  for (const auto& p : r.curve) {
    nlohmann::ordered_json e;
    e["t"] = p.t;
    e["train_loss"] = RealToJson(p.train_loss);
    e["dev_accuracy"] = RealToJson(p.dev_accuracy);
    curve.push_back(std::move(e));
  }
  j["curve"] = std::move(curve);
  auto weights = nlohmann::ordered_json::array();
  for (const auto& row : r.group_weight_trajectory) {
    auto jr = nlohmann::ordered_json::array();
    for (double v : row) jr.push_back(RealToJson(v));
    weights.push_back(std::move(jr));
  }
  j["group_weight_trajectory"] = std::move(weights);
  if (r.final_partition.k > 0) j["final_partition"] = PartitionToJson(r.final_partition);
  return j.dump() + "\n";
}

TrainReport ReportFromJson(const std::string& text) {
  TrainReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.seed = j.at("seed").get<std::uint64_t>();
    r.best_dev_accuracy = RealFromJson(j.at("best_dev_accuracy"));
    r.test_accuracy = RealFromJson(j.at("test_accuracy"));
    r.best_eval = j.at("best_eval").get<int>();
    for (const auto& e : j.at("curve")) {
      r.curve.push_back({e.at("t").get<double>(), RealFromJson(e.at("train_loss")),
                         RealFromJson(e.at("dev_accuracy"))});
    }
    for (const auto& row : j.at("group_weight_trajectory")) {
      std::vector<double> v;
      for (const auto& x : row) v.push_back(RealFromJson(x));
      r.group_weight_trajectory.push_back(std::move(v));
    }
    if (j.contains("final_partition")) {
      r.final_partition = PartitionFromJson(j.at("final_partition"));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("malformed train report: ") + e.what());
  }
  return r;
}

std::string ReportDigest(const TrainReport& report) { return Sha1Hex(ReportToJson(report)); }

std::string CurveCsv(const TrainReport& r) {
  std::ostringstream os;
  os << "eval,t,train_loss,dev_accuracy\n";
  for (std::size_t e = 0; e < r.curve.size(); ++e) {
    os << e << "," << FormatReal(r.curve[e].t) << "," << FormatReal(r.curve[e].train_loss)
       << "," << FormatReal(r.curve[e].dev_accuracy) << "\n";
  }
  return os.str();
}

std::string GroupWeightCsv(const TrainReport& r) {
  std::ostringstream os;
  os << "eval";
  for (std::size_t g = 0; g < r.group_weight_trajectory.size(); ++g) os << ",group" << g;
  os << "\n";
  const std::size_t evals =
      r.group_weight_trajectory.empty() ? 0 : r.group_weight_trajectory.front().size();
  for (std::size_t e = 0; e < evals; ++e) {
    os << e;
    for (const auto& row : r.group_weight_trajectory) os << "," << FormatReal(row[e]);
    os << "\n";
  }
  return os.str();
}

}  // namespace curdisc
