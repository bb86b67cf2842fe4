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

#include "curdisc/search.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "curdisc/error.hpp"
#include "curdisc/format.hpp"
#include "curdisc/json_io.hpp"
#include "curdisc/log.hpp"
#include "curdisc/rng.hpp"

namespace curdisc {
namespace {

constexpr int kRedrawFactor = 10;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string NowIso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> Arange(double lo, double hi, double step) {
  std::vector<double> out;
  const long n = std::lround((hi - lo) / step);
  for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

std::size_t GridIndex(const std::vector<double>& grid, double value) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = std::abs(grid[i] - value);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

double DimValue(const Assignment& a, std::size_t dim) {
  const auto& p = a[dim / 2];
  return dim % 2 == 0 ? p.rate : p.shift;
}

void SetDimValue(Assignment& a, std::size_t dim, double v) {
  auto& p = a[dim / 2];
  (dim % 2 == 0 ? p.rate : p.shift) = v;
}

bool IsComplete(const TrialRecord& r) {
  return r.status == TrialStatus::kComplete && std::isfinite(r.objective);
}

std::size_t SampleCategorical(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.Uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

}  // namespace

SearchSpace SearchSpace::Default(int k) {
  SearchSpace s;
  s.rate_grid = Arange(-10.0, 10.0, 2.0);
  s.shift_grid = Arange(-0.5, 1.5, 0.25);
  s.k = k;
  return s;
}

void SearchSpace::Validate() const {
  Require(k >= 1, "search space needs k >= 1");
  Require(!rate_grid.empty() && !shift_grid.empty(), "search grids must be non-empty");
  Require(std::is_sorted(rate_grid.begin(), rate_grid.end()) &&
              std::is_sorted(shift_grid.begin(), shift_grid.end()),
          "search grids must be ascending");
}

CurriculumConfig ToCurriculum(const Assignment& assignment, bool non_monotonic,
                              const std::string& name) {
  CurriculumConfig cfg;
  cfg.k = static_cast<int>(assignment.size());
  cfg.per_group = assignment;
  cfg.non_monotonic = non_monotonic;
  cfg.name = name;
  return cfg;
}

std::string TrialToJson(const TrialRecord& r) {
  nlohmann::ordered_json j;
  j["trial_id"] = r.trial_id;
  auto a = nlohmann::ordered_json::array();
  for (const auto& p : r.assignment) {
    nlohmann::ordered_json e;
    e["r"] = p.rate;
    e["s"] = p.shift;
    a.push_back(e);
  }
  j["assignment"] = std::move(a);
  j["seeds"] = r.seeds;
  auto accs = nlohmann::ordered_json::array();
  for (double v : r.per_seed_dev_acc) accs.push_back(RealToJson(v));
  j["per_seed_dev_acc"] = std::move(accs);
  j["objective"] = RealToJson(r.objective);
  j["status"] = r.status == TrialStatus::kComplete ? "complete" : "failed";
  j["started_at"] = r.started_at;
  j["finished_at"] = r.finished_at;
  if (!r.error.empty()) j["error"] = r.error;
  return j.dump();
}

TrialRecord TrialFromJson(const std::string& line) {
  TrialRecord r;
  try {
    const auto j = nlohmann::json::parse(line);
    r.trial_id = j.at("trial_id").get<std::int64_t>();
    for (const auto& e : j.at("assignment")) {
      r.assignment.push_back({e.at("r").get<double>(), e.at("s").get<double>()});
    }
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& v : j.at("per_seed_dev_acc")) r.per_seed_dev_acc.push_back(RealFromJson(v));
    const std::string status = j.at("status").get<std::string>();
    if (status == "complete") {
      r.status = TrialStatus::kComplete;
      r.objective = j.at("objective").get<double>();
    } else if (status == "failed") {
      r.status = TrialStatus::kFailed;
      r.objective = kNegInf;
    } else {
      throw std::runtime_error("unknown status '" + status + "'");
    }
    r.started_at = j.value("started_at", std::string());
    r.finished_at = j.value("finished_at", std::string());
    r.error = j.value("error", std::string());
  } catch (const std::exception& e) {
    Fail(ErrorCode::kParse, std::string("malformed trial record: ") + e.what());
  }
  if (r.assignment.empty()) Fail(ErrorCode::kParse, "trial record has no assignment");
  return r;
}

TrialStore::TrialStore(std::filesystem::path path) : path_(std::move(path)) {}

std::vector<TrialRecord> TrialStore::Load() const {
  std::lock_guard<std::mutex> lock(mu_);
  if (path_.empty()) return memory_;
  std::vector<TrialRecord> out;
  std::ifstream in(path_);
  if (!in) return out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(TrialFromJson(line));
    } catch (const Error& e) {
      Warn(path_.string() + ":" + std::to_string(lineno) + ": skipping corrupt trial entry (" +
           e.what() + ")");
    }
  }
  return out;
}

void TrialStore::Append(const TrialRecord& record) {
  std::lock_guard<std::mutex> lock(mu_);
  if (path_.empty()) {
    memory_.push_back(record);
    return;
  }
  const std::string line = TrialToJson(record) + "\n";
  const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) Fail(ErrorCode::kIo, "cannot open trial store " + path_.string());
  ::flock(fd, LOCK_EX);
  std::size_t written = 0;
  bool ok = true;
  while (written < line.size()) {
    const ssize_t w = ::write(fd, line.data() + written, line.size() - written);
    if (w <= 0) {
      ok = false;
      break;
    }
    written += static_cast<std::size_t>(w);
  }
  ::flock(fd, LOCK_UN);
  ::close(fd);
  if (!ok) Fail(ErrorCode::kIo, "write failed for trial store " + path_.string());
}

TpeModel FitTpe(const std::vector<TrialRecord>& history, const SearchSpace& space,
                const TpeSettings& settings) {
  const std::vector<TrialRecord> ranked = RankTrials(history);
  TpeModel model;
  const std::size_t dims = space.Dimensions();
  std::vector<std::vector<double>> good_counts(dims), bad_counts(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    good_counts[d].assign(space.Grid(d).size(), 0.0);
    bad_counts[d].assign(space.Grid(d).size(), 0.0);
  }
  if (!ranked.empty()) {
    const auto n_good = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(settings.gamma * static_cast<double>(ranked.size()))));
    const double threshold = ranked[std::min(n_good, ranked.size()) - 1].objective;
    for (const auto& r : ranked) {
      Require(r.assignment.size() == static_cast<std::size_t>(space.k),
              "trial assignment does not match search space k");
      const bool good = r.objective >= threshold;
      (good ? model.n_good : model.n_bad)++;
      auto& counts = good ? good_counts : bad_counts;
      for (std::size_t d = 0; d < dims; ++d) {
        counts[d][GridIndex(space.Grid(d), DimValue(r.assignment, d))] += 1.0;
      }
    }
  }
  auto normalize = [](std::vector<double> counts, std::size_t n) {
    const double denom = static_cast<double>(n) + static_cast<double>(counts.size());
    for (double& c : counts) c = (c + 1.0) / denom;
    return counts;
  };
  for (std::size_t d = 0; d < dims; ++d) {
    model.good.push_back(normalize(good_counts[d], model.n_good));
    model.bad.push_back(normalize(bad_counts[d], model.n_bad));
  }
  return model;
}

Assignment RandomAssignment(const SearchSpace& space, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  Assignment a(static_cast<std::size_t>(space.k));
  for (std::size_t d = 0; d < space.Dimensions(); ++d) {
    const auto& grid = space.Grid(d);
    SetDimValue(a, d, grid[rng.Below(grid.size())]);
  }
  return a;
}

Assignment Suggest(const std::vector<TrialRecord>& history, const SearchSpace& space,
                   std::uint64_t rng_seed, const TpeSettings& settings) {
  space.Validate();
  const auto complete =
      static_cast<std::size_t>(std::count_if(history.begin(), history.end(), IsComplete));
  if (complete < static_cast<std::size_t>(settings.n_startup)) {
    return RandomAssignment(space, rng_seed);
  }
  const TpeModel model = FitTpe(history, space, settings);
  // Trials are deterministic given their seeds, so a repeated assignment
  // would only re-measure a known objective.
  std::set<std::vector<double>> seen;
  for (const auto& r : history) {
    std::vector<double> key;
    for (std::size_t d = 0; d < space.Dimensions(); ++d) key.push_back(DimValue(r.assignment, d));
    seen.insert(std::move(key));
  }
  Rng rng(rng_seed);
  const std::size_t dims = space.Dimensions();
  Assignment best(static_cast<std::size_t>(space.k));
  bool found = false;
  double best_score = -std::numeric_limits<double>::infinity();
  Assignment candidate(static_cast<std::size_t>(space.k));
  std::vector<double> key(dims);
  const int max_draws = settings.n_candidates * kRedrawFactor;
  int fresh = 0;
  for (int c = 0; c < max_draws && fresh < settings.n_candidates; ++c) {
    double score = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      const std::size_t idx = SampleCategorical(model.good[d], rng);
      key[d] = space.Grid(d)[idx];
      SetDimValue(candidate, d, key[d]);
      score += std::log(model.good[d][idx]) - std::log(model.bad[d][idx]);
    }
    if (seen.count(key)) continue;
    ++fresh;
    if (score > best_score) {
      best_score = score;
      best = candidate;
      found = true;
    }
  }
  if (!found) return RandomAssignment(space, DeriveSeed(rng_seed, 1));
  return best;
}

TrialEvaluator TrainingEvaluator(const Dataset& train, const Dataset& dev,
                                 const DifficultyPartition& partition, const TrainerConfig& cfg,
                                 bool non_monotonic, int threads) {
  return [&train, &dev, &partition, cfg, non_monotonic, threads](
             const Assignment& assignment, std::span<const std::uint64_t> seeds) {
    const CurriculumConfig curriculum = ToCurriculum(assignment, non_monotonic, "trial");
    std::vector<double> accs(seeds.size(), 0.0);
    auto run_one = [&](std::size_t i) {
      TrainerConfig run = cfg;
      run.seed = seeds[i];
      run.strategy.kind = StrategyKind::kCurriculum;
      accs[i] = Train(train, &dev, nullptr, &partition, run, &curriculum).best_dev_accuracy;
    };
    const std::size_t workers =
        std::min<std::size_t>(seeds.size(), static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
      for (std::size_t i = 0; i < seeds.size(); ++i) run_one(i);
      return accs;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (std::size_t i = w; i < seeds.size(); i += workers) run_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    return accs;
  };
}

TrialRecord RunTrial(std::int64_t trial_id, const Assignment& assignment,
                     const TrialEvaluator& evaluator, std::span<const std::uint64_t> seeds,
                     TrialStore* store) {
  Require(!seeds.empty(), "a trial needs at least one seed");
  TrialRecord r;
  r.trial_id = trial_id;
  r.assignment = assignment;
  r.seeds.assign(seeds.begin(), seeds.end());
  r.started_at = NowIso8601();
  try {
    r.per_seed_dev_acc = evaluator(assignment, seeds);
    Require(r.per_seed_dev_acc.size() == seeds.size(), "evaluator returned wrong seed count",
            ErrorCode::kInternal);
    double sum = 0.0;
    for (double v : r.per_seed_dev_acc) sum += v;
    r.objective = sum / static_cast<double>(r.per_seed_dev_acc.size());
    r.status = TrialStatus::kComplete;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDiverged) throw;
    r.status = TrialStatus::kFailed;
    r.objective = kNegInf;
    r.per_seed_dev_acc.clear();
    r.error = e.what();
  }
  r.finished_at = NowIso8601();
  if (store) store->Append(r);
  return r;
}

std::vector<TrialRecord> RankTrials(const std::vector<TrialRecord>& history) {
  std::vector<TrialRecord> ranked;
  for (const auto& r : history) {
    if (IsComplete(r)) ranked.push_back(r);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const TrialRecord& a, const TrialRecord& b) {
    if (a.objective != b.objective) return a.objective > b.objective;
    return a.trial_id < b.trial_id;
  });
  return ranked;
}

const TrialRecord& Incumbent(const std::vector<TrialRecord>& history) {
  const TrialRecord* best = nullptr;
  for (const auto& r : history) {
    if (!IsComplete(r)) continue;
    if (!best || r.objective > best->objective ||
        (r.objective == best->objective && r.trial_id < best->trial_id)) {
      best = &r;
    }
  }
  if (!best) Fail(ErrorCode::kInsufficientData, "no completed trials");
  return *best;
}

DiscoverResult Discover(const SearchSpace& space, const TrialEvaluator& evaluator,
                        const DiscoverOptions& options, TrialStore* store) {
  space.Validate();
  Require(options.budget >= options.tpe.n_startup,
          "budget must be at least the number of startup trials (" +
              std::to_string(options.tpe.n_startup) + ")");
  std::map<std::int64_t, TrialRecord> done;
  if (store) {
    for (auto& r : store->Load()) {
      if (r.assignment.size() != static_cast<std::size_t>(space.k)) {
        Warn("trial store: skipping trial " + std::to_string(r.trial_id) +
             " with mismatched group count");
        continue;
      }
      done.emplace(r.trial_id, std::move(r));
    }
  }
  std::vector<TrialRecord> prefix;
  for (std::int64_t id = 0; id < options.budget; ++id) {
    auto it = done.find(id);
    if (it == done.end()) {
      const std::uint64_t seed = DeriveSeed(options.master_seed, static_cast<std::uint64_t>(id));
      const Assignment a = options.sampler == Sampler::kTpe
                               ? Suggest(prefix, space, seed, options.tpe)
                               : RandomAssignment(space, seed);
      it = done.emplace(id, RunTrial(id, a, evaluator, options.seeds, store)).first;
    }
    prefix.push_back(it->second);
  }
  DiscoverResult result;
  result.history = std::move(prefix);
  result.incumbent = Incumbent(result.history);
  result.best = ToCurriculum(result.incumbent.assignment, options.non_monotonic, options.name);
  return result;
}

CurveBand TopCurriculaSummary(const std::vector<TrialRecord>& history, int top_n, int steps) {
  Require(top_n >= 1, "top_n must be >= 1");
  Require(steps >= 2, "steps must be >= 2");
  const auto ranked = RankTrials(history);
  if (ranked.size() < static_cast<std::size_t>(top_n)) {
    Fail(ErrorCode::kInsufficientData, "only " + std::to_string(ranked.size()) +
                                           " complete trials, need " + std::to_string(top_n));
  }
  const std::size_t k = ranked.front().assignment.size();
  CurveBand band;
  for (int i = 0; i < steps; ++i) band.t.push_back(static_cast<double>(i) / (steps - 1));
  band.mean.assign(k, std::vector<double>(band.t.size()));
  band.lo = band.mean;
  band.hi = band.mean;
  const auto n = static_cast<std::size_t>(top_n);
  for (std::size_t g = 0; g < k; ++g) {
    for (std::size_t i = 0; i < band.t.size(); ++i) {
      std::vector<double> w(n);
      for (std::size_t m = 0; m < n; ++m) {
        Require(ranked[m].assignment.size() == k, "trials disagree on group count");
        w[m] = GlfWeight(band.t[i], ranked[m].assignment[g]);
      }
      double mean = 0.0;
      for (double v : w) mean += v;
      mean /= static_cast<double>(n);
      double half = 0.0;
      if (n > 1) {
        double ss = 0.0;
        for (double v : w) ss += (v - mean) * (v - mean);
        half = 1.96 * std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
      }
      band.mean[g][i] = mean;
      band.lo[g][i] = mean - half;
      band.hi[g][i] = mean + half;
    }
  }
  return band;
}

std::string CurveBandCsv(const CurveBand& band) {
  std::ostringstream os;
  os << "t,group,mean,lo,hi\n";
  for (std::size_t g = 0; g < band.mean.size(); ++g) {
    for (std::size_t i = 0; i < band.t.size(); ++i) {
      os << FormatReal(band.t[i]) << "," << g << "," << FormatReal(band.mean[g][i]) << ","
         << FormatReal(band.lo[g][i]) << "," << FormatReal(band.hi[g][i]) << "\n";
    }
  }
  return os.str();
}

std::string TrialRankingCsv(const std::vector<TrialRecord>& history) {
  const auto ranked = RankTrials(history);
  std::ostringstream os;
  os << "rank,trial_id,objective";
  const std::size_t k = ranked.empty() ? 0 : ranked.front().assignment.size();
  for (std::size_t g = 0; g < k; ++g) os << ",r" << g << ",s" << g;
  os << "\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    os << i + 1 << "," << ranked[i].trial_id << "," << FormatReal(ranked[i].objective);
    for (const auto& p : ranked[i].assignment) {
      os << "," << FormatReal(p.rate) << "," << FormatReal(p.shift);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace curdisc
