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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "curdisc/dataset.hpp"
#include "curdisc/partition.hpp"
#include "curdisc/schedule.hpp"
#include "curdisc/trainer.hpp"

namespace curdisc {

// Discrete (rate, shift) grid searched independently for every group.
struct SearchSpace {
  std::vector<double> rate_grid;
  std::vector<double> shift_grid;
  int k = 3;

  // Rates -10..10 step 2, shifts -0.5..1.5 step 0.25.
  static SearchSpace Default(int k);

  std::size_t Dimensions() const { return 2 * static_cast<std::size_t>(k); }
  // Even dimensions are group rates, odd dimensions group shifts.
  const std::vector<double>& Grid(std::size_t dim) const {
    return dim % 2 == 0 ? rate_grid : shift_grid;
  }
  void Validate() const;
};

// One (rate, shift) pair per group.
using Assignment = std::vector<GlfParams>;

CurriculumConfig ToCurriculum(const Assignment& assignment, bool non_monotonic,
                              const std::string& name);

enum class TrialStatus { kComplete, kFailed };

struct TrialRecord {
  std::int64_t trial_id = 0;
  Assignment assignment;
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed_dev_acc;
  // Mean of per_seed_dev_acc; -inf for failed trials.
  double objective = 0.0;
  TrialStatus status = TrialStatus::kComplete;
  std::string started_at;
  std::string finished_at;
  std::string error;
};

std::string TrialToJson(const TrialRecord& record);
TrialRecord TrialFromJson(const std::string& line);

// Append-only JSONL store. Appends take a process-local mutex and an
// exclusive file lock, so concurrent trials never interleave records.
class TrialStore {
 public:
  // An empty path keeps records in memory only.
  explicit TrialStore(std::filesystem::path path = {});

  // Committed records in file order. Corrupt lines are skipped with a warning.
  std::vector<TrialRecord> Load() const;
  void Append(const TrialRecord& record);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::vector<TrialRecord> memory_;
};

struct TpeSettings {
  double gamma = 0.25;
  int n_startup = 10;
  int n_candidates = 24;
};

// Per-dimension categorical Parzen densities over the grid values.
struct TpeModel {
  std::vector<std::vector<double>> good;  // l(.)
  std::vector<std::vector<double>> bad;   // g(.)
  std::size_t n_good = 0;
  std::size_t n_bad = 0;
};

// Splits the complete trials at the gamma quantile of the objective (higher
// is better; trials tied with the boundary join the good set) and fits
// add-one-smoothed densities.
TpeModel FitTpe(const std::vector<TrialRecord>& history, const SearchSpace& space,
                const TpeSettings& settings = {});

Assignment RandomAssignment(const SearchSpace& space, std::uint64_t rng_seed);

// Next point to evaluate: uniform while fewer than n_startup trials are
// complete, then the best of n_candidates draws from l(.) under l/g.
Assignment Suggest(const std::vector<TrialRecord>& history, const SearchSpace& space,
                   std::uint64_t rng_seed, const TpeSettings& settings = {});

// Scores an assignment once per seed; the returned values are the per-seed
// dev accuracies. Throwing Error(kDiverged) marks the trial failed.
using TrialEvaluator =
    std::function<std::vector<double>(const Assignment&, std::span<const std::uint64_t> seeds)>;

// Evaluator that trains the built-in classifier under the curriculum built
// from the assignment and reports the best dev accuracy per seed. Seeds are
// trained on up to `threads` worker threads.
TrialEvaluator TrainingEvaluator(const Dataset& train, const Dataset& dev,
                                 const DifficultyPartition& partition, const TrainerConfig& cfg,
                                 bool non_monotonic = false, int threads = 1);

TrialRecord RunTrial(std::int64_t trial_id, const Assignment& assignment,
                     const TrialEvaluator& evaluator, std::span<const std::uint64_t> seeds,
                     TrialStore* store);

enum class Sampler { kTpe, kRandom };

struct DiscoverOptions {
  int budget = 100;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::uint64_t master_seed = 0;
  Sampler sampler = Sampler::kTpe;
  TpeSettings tpe;
  bool non_monotonic = false;
  std::string name = "sp";
};

struct DiscoverResult {
  CurriculumConfig best;
  TrialRecord incumbent;
  std::vector<TrialRecord> history;  // ordered by trial id
};

// Runs trials 0..budget-1, skipping ids already committed to `store`.
// Trial i is suggested from trials 0..i-1 with a seed derived from the
// master seed and i, so an interrupted search resumes to the same result.
DiscoverResult Discover(const SearchSpace& space, const TrialEvaluator& evaluator,
                        const DiscoverOptions& options, TrialStore* store = nullptr);

// Highest objective, earliest trial on ties; failed trials never win.
const TrialRecord& Incumbent(const std::vector<TrialRecord>& history);

// Complete trials ordered by objective (desc), trial id (asc).
std::vector<TrialRecord> RankTrials(const std::vector<TrialRecord>& history);

struct CurveBand {
  std::vector<double> t;
  std::vector<std::vector<double>> mean;  // [group][t]
  std::vector<std::vector<double>> lo;
  std::vector<std::vector<double>> hi;
};

// Mean and normal-approximation 95% interval of the top_n trials' weight
// curves on a `steps`-point grid over [0, 1].
CurveBand TopCurriculaSummary(const std::vector<TrialRecord>& history, int top_n, int steps = 21);

// Header `t,group,mean,lo,hi`.
std::string CurveBandCsv(const CurveBand& band);

// Completed trials, best first: rank,trial_id,objective,r0,s0,...
std::string TrialRankingCsv(const std::vector<TrialRecord>& history);

}  // namespace curdisc
