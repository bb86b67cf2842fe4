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

#include "curdisc/curdisc.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "curdisc/dataset.hpp"
#include "curdisc/difficulty.hpp"
#include "curdisc/dynamics.hpp"
#include "curdisc/error.hpp"
#include "curdisc/format.hpp"
#include "curdisc/harness.hpp"
#include "curdisc/log.hpp"
#include "curdisc/schedule.hpp"
#include "curdisc/search.hpp"
#include "curdisc/trainer.hpp"

struct cd_dataset {
  curdisc::Dataset value;
};
struct cd_partition {
  curdisc::DifficultyPartition value;
};
struct cd_curriculum {
  curdisc::CurriculumConfig value;
};
struct cd_report {
  curdisc::TrainReport value;
};

namespace {

thread_local std::string g_last_error;

cd_status FromCode(curdisc::ErrorCode code) {
  switch (code) {
    case curdisc::ErrorCode::kInvalidArgument: return CD_ERR_INVALID_ARGUMENT;
    case curdisc::ErrorCode::kIo: return CD_ERR_IO;
    case curdisc::ErrorCode::kParse: return CD_ERR_PARSE;
    case curdisc::ErrorCode::kOutOfRange: return CD_ERR_OUT_OF_RANGE;
    case curdisc::ErrorCode::kDiverged: return CD_ERR_DIVERGED;
    case curdisc::ErrorCode::kInsufficientData: return CD_ERR_INSUFFICIENT_DATA;
    case curdisc::ErrorCode::kInternal: return CD_ERR_INTERNAL;
  }
  return CD_ERR_INTERNAL;
}

template <typename F>
cd_status Guard(F&& body) {
  g_last_error.clear();
  try {
    body();
    return CD_OK;
  } catch (const curdisc::Error& e) {
    g_last_error = e.what();
    return FromCode(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CD_ERR_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return CD_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CD_ERR_INTERNAL;
  }
}

void Need(const void* p, const char* what) {
  if (!p) curdisc::Fail(curdisc::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

std::string Str(const char* s, const char* what) {
  Need(s, what);
  return s;
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void Emit(char** out, const std::string& s) {
  if (out) *out = Dup(s);
}

curdisc::TrainerConfig ToTrainer(const cd_trainer_config* c) {
  curdisc::TrainerConfig cfg;
  if (!c) return cfg;
  if (c->model) cfg.model = curdisc::ParseModel(c->model);
  if (c->optimizer) cfg.optimizer = curdisc::ParseOptimizer(c->optimizer);
  cfg.learning_rate = c->learning_rate;
  cfg.batch_size = c->batch_size;
  cfg.epochs = c->epochs;
  cfg.seed = c->seed;
  cfg.eval_every = c->eval_every;
  if (c->strategy) cfg.strategy.kind = curdisc::ParseStrategyKind(c->strategy);
  cfg.strategy.lambda = c->lambda;
  cfg.strategy.spl_growth = c->spl_growth;
  cfg.strategy.alpha = c->alpha;
  cfg.strategy.tau = c->tau;
  cfg.strategy.ema_decay = c->ema_decay;
  return cfg;
}

std::vector<std::uint64_t> Seeds(const uint64_t* seeds, size_t n) {
  if (n == 0) curdisc::Fail(curdisc::ErrorCode::kInvalidArgument, "no seeds given");
  Need(seeds, "seeds");
  return std::vector<std::uint64_t>(seeds, seeds + n);
}

struct WarningSink {
  cd_warning_fn fn;
  void* user;
};

}  // namespace

extern "C" {

const char* cd_version(void) { return "0.1.0"; }

const char* cd_status_string(cd_status status) {
  switch (status) {
    case CD_OK: return "ok";
    case CD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CD_ERR_IO: return "i/o error";
    case CD_ERR_PARSE: return "parse error";
    case CD_ERR_OUT_OF_RANGE: return "out of range";
    case CD_ERR_DIVERGED: return "training diverged";
    case CD_ERR_INSUFFICIENT_DATA: return "insufficient data";
    case CD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* cd_last_error(void) { return g_last_error.c_str(); }

void cd_free_string(char* s) { std::free(s); }

void cd_set_warning_callback(cd_warning_fn fn, void* user) {
  if (!fn) {
    curdisc::SetWarningHandler(nullptr);
    return;
  }
  WarningSink sink{fn, user};
  curdisc::SetWarningHandler([sink](const std::string& m) { sink.fn(m.c_str(), sink.user); });
}

cd_status cd_dataset_load(const char* path, const char* format, int num_classes,
                          cd_dataset** out) {
  return Guard([&] {
    Need(out, "out");
    auto ds = std::make_unique<cd_dataset>();
    ds->value = curdisc::LoadDataset(Str(path, "path"),
                                     curdisc::ParseDataFormat(format ? format : "jsonl"),
                                     num_classes);
    *out = ds.release();
  });
}

cd_status cd_dataset_load_dir(const char* dir, cd_dataset** train, cd_dataset** dev,
                              cd_dataset** test) {
  return Guard([&] {
    Need(train, "train");
    Need(dev, "dev");
    Need(test, "test");
    auto splits = curdisc::LoadDataDir(Str(dir, "dir"));
    auto a = std::make_unique<cd_dataset>(cd_dataset{std::move(splits.train)});
    auto b = std::make_unique<cd_dataset>(cd_dataset{std::move(splits.dev)});
    auto c = std::make_unique<cd_dataset>(cd_dataset{std::move(splits.test)});
    *train = a.release();
    *dev = b.release();
    *test = c.release();
  });
}

cd_status cd_dataset_save(const cd_dataset* ds, const char* path) {
  return Guard([&] {
    Need(ds, "dataset");
    curdisc::SaveDataset(ds->value, Str(path, "path"));
  });
}

cd_status cd_dataset_describe(const cd_dataset* ds, char** out) {
  return Guard([&] {
    Need(ds, "dataset");
    Emit(out, curdisc::DescribeDataset(ds->value));
  });
}

size_t cd_dataset_size(const cd_dataset* ds) { return ds ? ds->value.size() : 0; }

int cd_dataset_num_classes(const cd_dataset* ds) { return ds ? ds->value.num_classes : 0; }

void cd_dataset_free(cd_dataset* ds) { delete ds; }

void cd_synthesis_params_init(cd_synthesis_params* p) {
  if (!p) return;
  const curdisc::SynthesisParams d;
  p->n = d.n;
  p->num_classes = d.num_classes;
  p->annotators = d.annotators;
  p->noise_hard = d.noise_hard;
  p->seed = d.seed;
  p->dim = d.dim;
  p->separation = d.separation;
  p->hard_spread = d.hard_spread;
}

cd_status cd_synthesize(const cd_synthesis_params* p, cd_dataset** train, cd_dataset** dev,
                        cd_dataset** test, char** latent_csv) {
  return Guard([&] {
    Need(p, "params");
    curdisc::SynthesisParams sp;
    sp.n = p->n;
    sp.num_classes = p->num_classes;
    sp.annotators = p->annotators;
    sp.noise_hard = p->noise_hard;
    sp.seed = p->seed;
    sp.dim = p->dim;
    sp.separation = p->separation;
    sp.hard_spread = p->hard_spread;
    auto r = curdisc::Synthesize(sp);
    std::string latent;
    if (latent_csv) {
      std::ostringstream os;
      os << "id,delta,true_label\n";
      for (const auto& [id, delta] : r.latent_difficulty) {
        os << id << "," << curdisc::FormatReal(delta) << "," << r.true_label.at(id) << "\n";
      }
      latent = os.str();
    }
    std::unique_ptr<cd_dataset> a, b, c;
    if (train) a = std::make_unique<cd_dataset>(cd_dataset{std::move(r.train)});
    if (dev) b = std::make_unique<cd_dataset>(cd_dataset{std::move(r.dev)});
    if (test) c = std::make_unique<cd_dataset>(cd_dataset{std::move(r.test)});
    char* l = latent_csv ? Dup(latent) : nullptr;
    if (train) *train = a.release();
    if (dev) *dev = b.release();
    if (test) *test = c.release();
    if (latent_csv) *latent_csv = l;
  });
}

void cd_trainer_config_init(cd_trainer_config* cfg) {
  if (!cfg) return;
  const curdisc::TrainerConfig d;
  cfg->model = "linear";
  cfg->optimizer = "adam";
  cfg->learning_rate = d.learning_rate;
  cfg->batch_size = d.batch_size;
  cfg->epochs = d.epochs;
  cfg->seed = d.seed;
  cfg->eval_every = d.eval_every;
  cfg->strategy = "none";
  cfg->lambda = d.strategy.lambda;
  cfg->spl_growth = d.strategy.spl_growth;
  cfg->alpha = d.strategy.alpha;
  cfg->tau = d.strategy.tau;
  cfg->ema_decay = d.strategy.ema_decay;
}

cd_status cd_partition_compute(const cd_dataset* train, const char* method, const char* partition,
                               int k, const cd_trainer_config* cfg, cd_partition** out) {
  return Guard([&] {
    Need(train, "train");
    Need(out, "out");
    auto p = std::make_unique<cd_partition>();
    p->value = curdisc::ScoreAndPartition(
        train->value, curdisc::ParseDifficultyMethod(method ? method : "entropy"),
        curdisc::ParsePartitionMethod(partition ? partition : "quantile"), k, ToTrainer(cfg));
    *out = p.release();
  });
}

cd_status cd_partition_load_sidecar(const char* path, int k, const char* method,
                                    cd_partition** out) {
  return Guard([&] {
    Need(out, "out");
    auto p = std::make_unique<cd_partition>();
    p->value = curdisc::LoadSidecar(Str(path, "path"), k,
                                    curdisc::ParseDifficultyMethod(method ? method : "entropy"));
    *out = p.release();
  });
}

cd_status cd_partition_sidecar(const cd_partition* p, char** out) {
  return Guard([&] {
    Need(p, "partition");
    Emit(out, curdisc::SidecarJsonl(p->value));
  });
}

cd_status cd_partition_histogram(const cd_partition* p, int bins, char** out) {
  return Guard([&] {
    Need(p, "partition");
    Emit(out, curdisc::ScoreHistogramCsv(p->value, bins));
  });
}

int cd_partition_k(const cd_partition* p) { return p ? p->value.k : 0; }

size_t cd_partition_group_size(const cd_partition* p, int group) {
  if (!p || group < 0 || group >= p->value.k) return 0;
  return p->value.GroupSizes()[static_cast<std::size_t>(group)];
}

void cd_partition_free(cd_partition* p) { delete p; }

cd_status cd_dataset_subsample(const cd_dataset* ds, const cd_partition* p, int per_group,
                               uint64_t seed, cd_dataset** out) {
  return Guard([&] {
    Need(ds, "dataset");
    Need(p, "partition");
    Need(out, "out");
    auto s = std::make_unique<cd_dataset>();
    s->value = curdisc::DifficultyBalancedSubsample(ds->value, p->value, per_group, seed);
    *out = s.release();
  });
}

cd_status cd_curriculum_preset(const char* name, int k, cd_curriculum** out) {
  return Guard([&] {
    Need(out, "out");
    auto c = std::make_unique<cd_curriculum>();
    c->value = curdisc::Preset(Str(name, "name"), k);
    *out = c.release();
  });
}

cd_status cd_curriculum_load(const char* path, cd_curriculum** out) {
  return Guard([&] {
    Need(out, "out");
    auto c = std::make_unique<cd_curriculum>();
    c->value = curdisc::LoadCurriculum(Str(path, "path"));
    *out = c.release();
  });
}

cd_status cd_curriculum_from_json(const char* text, cd_curriculum** out) {
  return Guard([&] {
    Need(out, "out");
    auto c = std::make_unique<cd_curriculum>();
    c->value = curdisc::CurriculumFromJson(Str(text, "text"));
    *out = c.release();
  });
}

cd_status cd_curriculum_to_json(const cd_curriculum* c, char** out) {
  return Guard([&] {
    Need(c, "curriculum");
    Emit(out, curdisc::CurriculumToJson(c->value));
  });
}

cd_status cd_curriculum_save(const cd_curriculum* c, const char* path) {
  return Guard([&] {
    Need(c, "curriculum");
    curdisc::SaveCurriculum(c->value, Str(path, "path"));
  });
}

cd_status cd_curriculum_trajectory(const cd_curriculum* c, int steps, char** csv) {
  return Guard([&] {
    Need(c, "curriculum");
    Emit(csv, curdisc::TrajectoryCsv(c->value, steps));
  });
}

cd_status cd_curriculum_weight(const cd_curriculum* c, double t, int group, double* out) {
  return Guard([&] {
    Need(c, "curriculum");
    Need(out, "out");
    *out = curdisc::WeightedLoss(1.0, t, group, c->value);
  });
}

int cd_curriculum_k(const cd_curriculum* c) { return c ? c->value.k : 0; }

void cd_curriculum_set_non_monotonic(cd_curriculum* c, int enabled) {
  if (c) c->value.non_monotonic = enabled != 0;
}

void cd_curriculum_free(cd_curriculum* c) { delete c; }

cd_status cd_train(const cd_dataset* train, const cd_dataset* dev, const cd_dataset* test,
                   const cd_partition* partition, const cd_trainer_config* cfg,
                   const cd_curriculum* curriculum, cd_report** out) {
  return Guard([&] {
    Need(train, "train");
    Need(cfg, "config");
    Need(out, "out");
    auto r = std::make_unique<cd_report>();
    r->value = curdisc::Train(train->value, dev ? &dev->value : nullptr,
                              test ? &test->value : nullptr,
                              partition ? &partition->value : nullptr, ToTrainer(cfg),
                              curriculum ? &curriculum->value : nullptr);
    *out = r.release();
  });
}

cd_status cd_report_from_json(const char* text, cd_report** out) {
  return Guard([&] {
    Need(out, "out");
    auto r = std::make_unique<cd_report>();
    r->value = curdisc::ReportFromJson(Str(text, "text"));
    *out = r.release();
  });
}

cd_status cd_report_to_json(const cd_report* r, char** out) {
  return Guard([&] {
    Need(r, "report");
    Emit(out, curdisc::ReportToJson(r->value));
  });
}

cd_status cd_report_curve_csv(const cd_report* r, char** out) {
  return Guard([&] {
    Need(r, "report");
    Emit(out, curdisc::CurveCsv(r->value));
  });
}

cd_status cd_report_weights_csv(const cd_report* r, char** out) {
  return Guard([&] {
    Need(r, "report");
    Emit(out, curdisc::GroupWeightCsv(r->value));
  });
}

cd_status cd_report_groups_csv(const cd_report* r, char** out) {
  return Guard([&] {
    Need(r, "report");
    if (r->value.partition_history.empty()) {
      curdisc::Fail(curdisc::ErrorCode::kInsufficientData, "report has no partition history");
    }
    Emit(out, curdisc::ReassignmentLogCsv(curdisc::ReassignmentLog(r->value.partition_history)));
  });
}

cd_status cd_report_digest(const cd_report* r, char** out) {
  return Guard([&] {
    Need(r, "report");
    Emit(out, curdisc::ReportDigest(r->value));
  });
}

double cd_report_best_dev_accuracy(const cd_report* r) {
  return r ? r->value.best_dev_accuracy : std::numeric_limits<double>::quiet_NaN();
}

double cd_report_test_accuracy(const cd_report* r) {
  return r ? r->value.test_accuracy : std::numeric_limits<double>::quiet_NaN();
}

uint64_t cd_report_seed(const cd_report* r) { return r ? r->value.seed : 0; }

void cd_report_free(cd_report* r) { delete r; }

void cd_discover_options_init(cd_discover_options* o) {
  if (!o) return;
  static const uint64_t kSeeds[] = {1, 2, 3};
  const curdisc::DiscoverOptions d;
  o->budget = d.budget;
  o->seeds = kSeeds;
  o->num_seeds = 3;
  o->master_seed = d.master_seed;
  o->sampler = "tpe";
  o->non_monotonic = 0;
  o->name = "sp";
  o->threads = 1;
}

cd_status cd_discover(const cd_dataset* train, const cd_dataset* dev,
                      const cd_partition* partition, const cd_trainer_config* cfg,
                      const cd_discover_options* opts, const char* store_path,
                      cd_curriculum** best, double* best_objective) {
  return Guard([&] {
    Need(train, "train");
    Need(dev, "dev");
    Need(partition, "partition");
    Need(opts, "options");
    curdisc::DiscoverOptions o;
    o.budget = opts->budget;
    o.seeds = Seeds(opts->seeds, opts->num_seeds);
    o.master_seed = opts->master_seed;
    const std::string sampler = opts->sampler ? opts->sampler : "tpe";
    if (sampler == "tpe") {
      o.sampler = curdisc::Sampler::kTpe;
    } else if (sampler == "random") {
      o.sampler = curdisc::Sampler::kRandom;
    } else {
      curdisc::Fail(curdisc::ErrorCode::kInvalidArgument, "unknown sampler '" + sampler + "'");
    }
    o.non_monotonic = opts->non_monotonic != 0;
    if (opts->name) o.name = opts->name;
    const auto space = curdisc::SearchSpace::Default(partition->value.k);
    const auto evaluator =
        curdisc::TrainingEvaluator(train->value, dev->value, partition->value, ToTrainer(cfg),
                                   o.non_monotonic, opts->threads);
    curdisc::TrialStore store(store_path ? store_path : "");
    auto result = curdisc::Discover(space, evaluator, o, &store);
    if (best) {
      auto c = std::make_unique<cd_curriculum>();
      c->value = result.best;
      *best = c.release();
    }
    if (best_objective) *best_objective = result.incumbent.objective;
  });
}

cd_status cd_trials_report(const char* store_path, int top_n, int steps, char** ranking_csv,
                           char** band_csv) {
  return Guard([&] {
    const std::string path = Str(store_path, "store_path");
    if (!std::filesystem::exists(path)) {
      curdisc::Fail(curdisc::ErrorCode::kIo, "trial store " + path + " does not exist");
    }
    const auto history = curdisc::TrialStore(path).Load();
    const std::string ranking = curdisc::TrialRankingCsv(history);
    const std::string band =
        curdisc::CurveBandCsv(curdisc::TopCurriculaSummary(history, top_n, steps));
    char* a = ranking_csv ? Dup(ranking) : nullptr;
    if (band_csv) *band_csv = Dup(band);
    if (ranking_csv) *ranking_csv = a;
  });
}

cd_status cd_experiment_run(const char* config_path, const char* out_dir, char** summary_csv) {
  return Guard([&] {
    auto r = curdisc::RunExperimentFile(Str(config_path, "config_path"), out_dir ? out_dir : "");
    Emit(summary_csv, r.summary_csv);
  });
}

cd_status cd_run_summarize(const char* run_dir, char** summary_csv) {
  return Guard([&] { Emit(summary_csv, curdisc::SummarizeRunDir(Str(run_dir, "run_dir"))); });
}

cd_status cd_sweep_k(const char* data_dir, const char* method, const char* partition,
                     const int* ks, size_t num_ks, const cd_trainer_config* cfg,
                     const uint64_t* seeds, size_t num_seeds, const char* out_dir, int threads,
                     char** sweep_csv) {
  return Guard([&] {
    if (num_ks == 0) curdisc::Fail(curdisc::ErrorCode::kInvalidArgument, "no k values given");
    Need(ks, "ks");
    const std::string dir = Str(data_dir, "data_dir");
    if (!std::filesystem::exists(dir)) {
      curdisc::Fail(curdisc::ErrorCode::kIo, "data directory " + dir + " does not exist");
    }
    const auto data = curdisc::LoadDataDir(dir);
    const auto rows = curdisc::SweepK(
        data, curdisc::ParseDifficultyMethod(method ? method : "entropy"),
        curdisc::ParsePartitionMethod(partition ? partition : "quantile"),
        std::vector<int>(ks, ks + num_ks), ToTrainer(cfg), Seeds(seeds, num_seeds),
        out_dir ? out_dir : "", threads);
    Emit(sweep_csv, curdisc::SweepCsv(rows));
  });
}

cd_status cd_sweep_summarize(const char* out_dir, char** sweep_csv) {
  return Guard([&] { Emit(sweep_csv, curdisc::SummarizeSweepDir(Str(out_dir, "out_dir"))); });
}

cd_status cd_transfer_run(const char* config_path, const char* out_dir, char** raw_csv,
                          char** normalized_csv) {
  return Guard([&] {
    auto r = curdisc::RunTransferFile(Str(config_path, "config_path"), out_dir ? out_dir : "");
    char* a = raw_csv ? Dup(curdisc::MatrixCsv(r, false)) : nullptr;
    if (normalized_csv) *normalized_csv = Dup(curdisc::MatrixCsv(r, true));
    if (raw_csv) *raw_csv = a;
  });
}

}  // extern "C"
