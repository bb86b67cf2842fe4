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
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "curdisc/curdisc.h"

namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  explicit Failure(int code, const std::string& msg) : std::runtime_error(msg), code(code) {}
  int code;
};

void Check(cd_status s) {
  if (s != CD_OK) throw Failure(static_cast<int>(s), cd_last_error());
}

// Owns a string returned by the library.
class Text {
 public:
  Text() = default;
  Text(const Text&) = delete;
  Text& operator=(const Text&) = delete;
  ~Text() { cd_free_string(p_); }
  char** out() { return &p_; }
  std::string str() const { return p_ ? p_ : ""; }

 private:
  char* p_ = nullptr;
};

template <typename T, void (*Free)(T*)>
class Handle {
 public:
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p_); }
  T** out() { return &p_; }
  T* get() const { return p_; }

 private:
  T* p_ = nullptr;
};

using Dataset = Handle<cd_dataset, cd_dataset_free>;
using Partition = Handle<cd_partition, cd_partition_free>;
using Curriculum = Handle<cd_curriculum, cd_curriculum_free>;
using Report = Handle<cd_report, cd_report_free>;

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure(CD_ERR_IO, "cannot write " + path.string());
  out << text;
}

void WriteOrPrint(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    WriteText(path, text);
  }
}

template <typename T>
std::vector<T> ParseList(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw Failure(CD_ERR_INVALID_ARGUMENT, std::string("bad ") + what + " '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Failure(CD_ERR_INVALID_ARGUMENT, std::string("empty ") + what + " list");
  return out;
}

bool IsPreset(const std::string& s) { return s == "inc" || s == "anti" || s == "constant"; }

void LoadCurriculumArg(const std::string& spec, int k, Curriculum& out) {
  if (IsPreset(spec)) {
    Check(cd_curriculum_preset(spec.c_str(), k, out.out()));
  } else {
    Check(cd_curriculum_load(spec.c_str(), out.out()));
  }
}

struct TrainerFlags {
  std::string model = "linear";
  std::string optimizer = "adam";
  double lr = 1e-2;
  int batch = 16;
  int epochs = 10;
  double eval_every = 0.5;
  std::string strategy = "curriculum";
  double lambda = 1.2;
  double spl_growth = 0.0;
  double alpha = 0.9;
  double tau = std::numeric_limits<double>::quiet_NaN();

  void Add(CLI::App* app, bool with_strategy) {
    app->add_option("--model", model, "linear, mlp or mlp<hidden>");
    app->add_option("--optimizer", optimizer, "sgd or adam");
    app->add_option("--lr", lr);
    app->add_option("--batch", batch);
    app->add_option("--epochs", epochs);
    app->add_option("--eval-every", eval_every, "evaluation interval in epochs");
    if (with_strategy) {
      app->add_option("--strategy", strategy,
                      "none, curriculum, spl, superloss, dp or hardmining");
      app->add_option("--lambda", lambda, "spl threshold or superloss regularizer");
      app->add_option("--spl-growth", spl_growth);
      app->add_option("--alpha", alpha, "dp strength");
      app->add_option("--tau", tau, "dp threshold (default: median difficulty)");
    }
  }

  cd_trainer_config Config(uint64_t seed) const {
    cd_trainer_config c;
    cd_trainer_config_init(&c);
    c.model = model.c_str();
    c.optimizer = optimizer.c_str();
    c.learning_rate = lr;
    c.batch_size = batch;
    c.epochs = epochs;
    c.eval_every = eval_every;
    c.seed = seed;
    c.strategy = strategy.c_str();
    c.lambda = lambda;
    c.spl_growth = spl_growth;
    c.alpha = alpha;
    c.tau = tau;
    return c;
  }
};

struct DataDir {
  Dataset train, dev, test;
  explicit DataDir(const std::string& dir) {
    Check(cd_dataset_load_dir(dir.c_str(), train.out(), dev.out(), test.out()));
  }
};

void Warning(const char* message, void*) { std::cerr << "warning: " << message << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curriculum discovery over difficulty-grouped sample weighting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cd_version()));
  cd_set_warning_callback(Warning, nullptr);

  // data
  auto* data = app.add_subcommand("data", "synthesize or inspect datasets");
  data->require_subcommand(1);
  cd_synthesis_params sp;
  cd_synthesis_params_init(&sp);
  std::string synth_out;
  auto* synth = data->add_subcommand("synth", "write a synthetic annotated dataset");
  synth->add_option("--n", sp.n, "number of samples");
  synth->add_option("--classes", sp.num_classes);
  synth->add_option("--annotators", sp.annotators);
  synth->add_option("--noise", sp.noise_hard, "annotator error rate of the hardest samples");
  synth->add_option("--seed", sp.seed);
  synth->add_option("--dim", sp.dim);
  synth->add_option("--separation", sp.separation);
  synth->add_option("--hard-spread", sp.hard_spread);
  synth->add_option("--out-dir", synth_out)->required();
  synth->callback([&] {
    Dataset tr, dv, te;
    Text latent;
    Check(cd_synthesize(&sp, tr.out(), dv.out(), te.out(), latent.out()));
    const fs::path dir(synth_out);
    fs::create_directories(dir);
    Check(cd_dataset_save(tr.get(), (dir / "train.jsonl").c_str()));
    Check(cd_dataset_save(dv.get(), (dir / "dev.jsonl").c_str()));
    Check(cd_dataset_save(te.get(), (dir / "test.jsonl").c_str()));
    WriteText(dir / "latent.csv", latent.str());
    std::cout << "train " << cd_dataset_size(tr.get()) << ", dev " << cd_dataset_size(dv.get())
              << ", test " << cd_dataset_size(te.get()) << " -> " << synth_out << "\n";
  });

  std::string inspect_path, inspect_format = "jsonl";
  int inspect_classes = 0;
  auto* inspect = data->add_subcommand("inspect", "print dataset statistics");
  inspect->add_option("path", inspect_path)->required();
  inspect->add_option("--format", inspect_format, "jsonl or csv");
  inspect->add_option("--classes", inspect_classes, "number of classes (0 infers)");
  inspect->callback([&] {
    Dataset ds;
    Check(cd_dataset_load(inspect_path.c_str(), inspect_format.c_str(), inspect_classes, ds.out()));
    Text t;
    Check(cd_dataset_describe(ds.get(), t.out()));
    std::cout << t.str();
  });

  // difficulty
  auto* difficulty = app.add_subcommand("difficulty", "score and partition training samples");
  difficulty->require_subcommand(1);
  std::string score_dir, score_method = "entropy", score_partition = "quantile", score_out,
                         score_hist;
  int score_k = 3, score_bins = 20;
  uint64_t score_seed = 0;
  TrainerFlags score_trainer;
  auto* score = difficulty->add_subcommand("score", "write a difficulty sidecar");
  score->add_option("--data-dir", score_dir)->required();
  score->add_option("--method", score_method, "entropy or loss");
  score->add_option("--k", score_k);
  score->add_option("--partition", score_partition, "quantile or kmeans");
  score->add_option("--out", score_out, "sidecar JSONL path (default stdout)");
  score->add_option("--hist", score_hist, "histogram CSV path");
  score->add_option("--bins", score_bins);
  score->add_option("--seed", score_seed, "seed of the loss-prior run");
  score_trainer.Add(score, false);
  score->callback([&] {
    DataDir d(score_dir);
    Partition p;
    const auto cfg = score_trainer.Config(score_seed);
    Check(cd_partition_compute(d.train.get(), score_method.c_str(), score_partition.c_str(),
                               score_k, &cfg, p.out()));
    Text side;
    Check(cd_partition_sidecar(p.get(), side.out()));
    WriteOrPrint(score_out, side.str());
    if (!score_hist.empty()) {
      Text h;
      Check(cd_partition_histogram(p.get(), score_bins, h.out()));
      WriteText(score_hist, h.str());
    }
    std::cerr << "group sizes:";
    for (int g = 0; g < cd_partition_k(p.get()); ++g) {
      std::cerr << " " << cd_partition_group_size(p.get(), g);
    }
    std::cerr << "\n";
  });

  // curriculum
  auto* curriculum = app.add_subcommand("curriculum", "inspect weighting schedules");
  curriculum->require_subcommand(1);
  std::string show_cfg, show_out;
  int show_steps = 21, show_k = 3;
  auto* show = curriculum->add_subcommand("show", "emit the weight trajectory CSV");
  show->add_option("config", show_cfg, "curriculum JSON or preset name")->required();
  show->add_option("--steps", show_steps);
  show->add_option("--k", show_k, "group count for presets");
  show->add_option("--out", show_out);
  show->callback([&] {
    Curriculum c;
    LoadCurriculumArg(show_cfg, show_k, c);
    Text t;
    Check(cd_curriculum_trajectory(c.get(), show_steps, t.out()));
    WriteOrPrint(show_out, t.str());
  });
  std::string preset_name, preset_out;
  int preset_k = 3;
  auto* preset = curriculum->add_subcommand("preset", "write a preset curriculum as JSON");
  preset->add_option("name", preset_name, "inc, anti or constant")->required();
  preset->add_option("--k", preset_k);
  preset->add_option("--out", preset_out);
  preset->callback([&] {
    Curriculum c;
    Check(cd_curriculum_preset(preset_name.c_str(), preset_k, c.out()));
    Text t;
    Check(cd_curriculum_to_json(c.get(), t.out()));
    WriteOrPrint(preset_out, t.str() + "\n");
  });

  // train
  auto* train = app.add_subcommand("train", "train one model");
  std::string train_dir, train_curriculum = "inc", train_difficulty = "entropy",
                         train_partition = "quantile", train_out, train_sidecar;
  int train_k = 3;
  uint64_t train_seed = 0;
  bool train_nonmono = false;
  TrainerFlags train_flags;
  train->add_option("--data-dir", train_dir)->required();
  train->add_option("--curriculum", train_curriculum, "curriculum JSON or preset name");
  train->add_option("--difficulty", train_difficulty, "entropy or loss");
  train->add_option("--partition", train_partition, "quantile or kmeans");
  train->add_option("--sidecar", train_sidecar, "use a precomputed difficulty sidecar");
  train->add_option("--k", train_k);
  train->add_option("--seed", train_seed);
  train->add_flag("--non-monotonic", train_nonmono, "reassign samples between groups");
  train->add_option("--out-dir", train_out);
  train_flags.Add(train, true);
  train->callback([&] {
    DataDir d(train_dir);
    const auto cfg = train_flags.Config(train_seed);
    Partition p;
    if (train_sidecar.empty()) {
      Check(cd_partition_compute(d.train.get(), train_difficulty.c_str(), train_partition.c_str(),
                                 train_k, &cfg, p.out()));
    } else {
      Check(cd_partition_load_sidecar(train_sidecar.c_str(), train_k, train_difficulty.c_str(),
                                      p.out()));
    }
    Curriculum c;
    const bool use_curriculum = train_flags.strategy == "curriculum";
    if (use_curriculum) {
      LoadCurriculumArg(train_curriculum, cd_partition_k(p.get()), c);
      if (train_nonmono) cd_curriculum_set_non_monotonic(c.get(), 1);
    }
    Report r;
    Check(cd_train(d.train.get(), d.dev.get(), d.test.get(), p.get(), &cfg,
                   use_curriculum ? c.get() : nullptr, r.out()));
    if (!train_out.empty()) {
      const fs::path dir(train_out);
      Text json, curve, weights, groups;
      Check(cd_report_to_json(r.get(), json.out()));
      Check(cd_report_curve_csv(r.get(), curve.out()));
      Check(cd_report_weights_csv(r.get(), weights.out()));
      Check(cd_report_groups_csv(r.get(), groups.out()));
      WriteText(dir / "report.json", json.str());
      WriteText(dir / "curve.csv", curve.str());
      WriteText(dir / "weights.csv", weights.str());
      WriteText(dir / "groups.csv", groups.str());
    }
    std::printf("seed %llu best_dev %.6g test %.6g\n",
                static_cast<unsigned long long>(cd_report_seed(r.get())),
                cd_report_best_dev_accuracy(r.get()), cd_report_test_accuracy(r.get()));
  });

  // discover
  auto* discover = app.add_subcommand("discover", "search curriculum parameters");
  std::string disc_dir, disc_difficulty = "entropy", disc_partition = "quantile", disc_store,
                        disc_seeds = "1,2,3", disc_sampler = "tpe", disc_out, disc_name = "sp";
  int disc_budget = 100, disc_k = 3, disc_threads = 1;
  uint64_t disc_master = 0;
  bool disc_nonmono = false;
  TrainerFlags disc_flags;
  discover->add_option("--data-dir", disc_dir)->required();
  discover->add_option("--budget", disc_budget);
  discover->add_option("--seeds", disc_seeds, "comma-separated training seeds per trial");
  discover->add_option("--difficulty", disc_difficulty, "entropy or loss");
  discover->add_option("--partition", disc_partition, "quantile or kmeans");
  discover->add_option("--k", disc_k);
  discover->add_option("--store", disc_store, "append-only trial store (resumable)");
  discover->add_option("--master-seed", disc_master);
  discover->add_option("--sampler", disc_sampler, "tpe or random");
  discover->add_option("--threads", disc_threads);
  discover->add_option("--name", disc_name);
  discover->add_flag("--non-monotonic", disc_nonmono);
  discover->add_option("--out", disc_out, "best curriculum JSON path");
  disc_flags.Add(discover, false);
  discover->callback([&] {
    DataDir d(disc_dir);
    const auto cfg = disc_flags.Config(0);
    Partition p;
    Check(cd_partition_compute(d.train.get(), disc_difficulty.c_str(), disc_partition.c_str(),
                               disc_k, &cfg, p.out()));
    const auto seeds = ParseList<uint64_t>(disc_seeds, "seed");
    cd_discover_options o;
    cd_discover_options_init(&o);
    o.budget = disc_budget;
    o.seeds = seeds.data();
    o.num_seeds = seeds.size();
    o.master_seed = disc_master;
    o.sampler = disc_sampler.c_str();
    o.non_monotonic = disc_nonmono ? 1 : 0;
    o.name = disc_name.c_str();
    o.threads = disc_threads;
    Curriculum best;
    double objective = 0.0;
    Check(cd_discover(d.train.get(), d.dev.get(), p.get(), &cfg, &o, disc_store.c_str(),
                      best.out(), &objective));
    Text json;
    Check(cd_curriculum_to_json(best.get(), json.out()));
    WriteOrPrint(disc_out, json.str() + "\n");
    std::cerr << "best mean dev accuracy " << objective << "\n";
  });

  // experiment
  auto* experiment = app.add_subcommand("experiment", "run a configured multi-seed experiment");
  std::string exp_cfg, exp_out;
  experiment->add_option("config", exp_cfg)->required();
  experiment->add_option("--out-dir", exp_out)->required();
  experiment->callback([&] {
    Text t;
    Check(cd_experiment_run(exp_cfg.c_str(), exp_out.c_str(), t.out()));
    std::cout << t.str();
  });

  // sweep-k
  auto* sweep = app.add_subcommand("sweep-k", "accuracy of the inc preset across group counts");
  std::string sweep_dir, sweep_ks = "3,6,12", sweep_seeds = "1,2,3,4,5",
                         sweep_difficulty = "entropy", sweep_partition = "quantile", sweep_out;
  int sweep_threads = 1;
  TrainerFlags sweep_flags;
  sweep->add_option("--data-dir", sweep_dir)->required();
  sweep->add_option("--ks", sweep_ks, "comma-separated group counts");
  sweep->add_option("--seeds", sweep_seeds);
  sweep->add_option("--difficulty", sweep_difficulty);
  sweep->add_option("--partition", sweep_partition);
  sweep->add_option("--out-dir", sweep_out);
  sweep->add_option("--threads", sweep_threads);
  sweep_flags.Add(sweep, false);
  sweep->callback([&] {
    const auto ks = ParseList<int>(sweep_ks, "k");
    const auto seeds = ParseList<uint64_t>(sweep_seeds, "seed");
    const auto cfg = sweep_flags.Config(0);
    Text t;
    Check(cd_sweep_k(sweep_dir.c_str(), sweep_difficulty.c_str(), sweep_partition.c_str(),
                     ks.data(), ks.size(), &cfg, seeds.data(), seeds.size(), sweep_out.c_str(),
                     sweep_threads, t.out()));
    std::cout << t.str();
  });

  // transfer
  auto* transfer = app.add_subcommand("transfer", "cross-target curriculum transfer matrix");
  std::string tr_cfg, tr_out;
  bool tr_raw = false;
  transfer->add_option("config", tr_cfg)->required();
  transfer->add_option("--out-dir", tr_out);
  transfer->add_flag("--raw", tr_raw, "print raw accuracies instead of row-normalized");
  transfer->callback([&] {
    Text raw, norm;
    Check(cd_transfer_run(tr_cfg.c_str(), tr_out.c_str(), raw.out(), norm.out()));
    std::cout << (tr_raw ? raw.str() : norm.str());
  });

  // report
  auto* report = app.add_subcommand("report", "summarize stored results");
  std::string rep_path, rep_band;
  int rep_top = 5, rep_steps = 21;
  report->add_option("path", rep_path, "run directory, sweep directory or trial store")
      ->required();
  report->add_option("--top", rep_top, "curricula in the weight band (trial stores)");
  report->add_option("--steps", rep_steps);
  report->add_option("--band-out", rep_band, "weight band CSV path (trial stores)");
  report->callback([&] {
    Text t;
    const fs::path p(rep_path);
    if (fs::is_regular_file(p)) {
      Text band;
      Check(cd_trials_report(rep_path.c_str(), rep_top, rep_steps, t.out(), band.out()));
      if (!rep_band.empty()) WriteText(rep_band, band.str());
    } else if (fs::exists(p / "sweep.csv")) {
      Check(cd_sweep_summarize(rep_path.c_str(), t.out()));
    } else {
      Check(cd_run_summarize(rep_path.c_str(), t.out()));
    }
    std::cout << t.str();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.what() << "\n";
    return 1 + f.code;
  }
  return 0;
}
