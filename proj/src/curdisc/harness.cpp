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

#include "curdisc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "curdisc/digest.hpp"
#include "curdisc/dynamics.hpp"
#include "curdisc/error.hpp"
#include "curdisc/format.hpp"

namespace curdisc {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

// Runs body(i) for i in [0, n) over `threads` workers; the first exception
// is rethrown after all workers finish.
template <typename Body>
void ParallelFor(std::size_t n, int threads, Body body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string SeedDirName(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

void WriteRunReports(const std::filesystem::path& dir, const std::vector<TrainReport>& reports,
                     std::vector<std::string>* digests) {
  for (const auto& r : reports) {
    const auto seed_dir = dir / SeedDirName(r.seed);
    std::filesystem::create_directories(seed_dir);
    const std::string json = ReportToJson(r);
    WriteFile(seed_dir / "report.json", json);
    WriteFile(seed_dir / "curve.csv", CurveCsv(r));
    WriteFile(seed_dir / "weights.csv", GroupWeightCsv(r));
    if (!r.partition_history.empty()) {
      WriteFile(seed_dir / "groups.csv", ReassignmentLogCsv(ReassignmentLog(r.partition_history)));
    }
    if (digests) digests->push_back(SeedDirName(r.seed) + "/report.json " + GitBlobDigest(json));
  }
}

std::vector<TrainReport> LoadSeedReports(const std::filesystem::path& dir) {
  Require(std::filesystem::is_directory(dir), "not a run directory: " + dir.string(),
          ErrorCode::kIo);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && name.rfind("seed_", 0) == 0 &&
        std::filesystem::exists(entry.path() / "report.json")) {
      files.push_back(entry.path() / "report.json");
    }
  }
  std::vector<TrainReport> reports;
  for (const auto& f : files) reports.push_back(ReportFromJson(ReadFile(f)));
  std::sort(reports.begin(), reports.end(),
            [](const TrainReport& a, const TrainReport& b) { return a.seed < b.seed; });
  return reports;
}

}  // namespace

KeyValueConfig KeyValueConfig::Parse(const std::string& text) {
  KeyValueConfig cfg;
  cfg.text_ = text;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      Fail(ErrorCode::kParse, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) Fail(ErrorCode::kParse, "config line " + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = Trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::Load(const std::filesystem::path& path) {
  return Parse(ReadFile(path));
}

std::string KeyValueConfig::Get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string KeyValueConfig::Require(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) Fail(ErrorCode::kInvalidArgument, "config is missing key '" + key + "'");
  return it->second;
}

int KeyValueConfig::GetInt(const std::string& key, int fallback) const {
  if (!Has(key)) return fallback;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(values_.at(key), &pos);
    if (pos != values_.at(key).size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    Fail(ErrorCode::kParse, "config key '" + key + "' is not an integer");
  }
}

double KeyValueConfig::GetReal(const std::string& key, double fallback) const {
  if (!Has(key)) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(values_.at(key), &pos);
    if (pos != values_.at(key).size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    Fail(ErrorCode::kParse, "config key '" + key + "' is not a number");
  }
}

bool KeyValueConfig::GetBool(const std::string& key, bool fallback) const {
  if (!Has(key)) return fallback;
  const std::string v = values_.at(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  Fail(ErrorCode::kParse, "config key '" + key + "' is not a boolean");
}

std::vector<std::uint64_t> KeyValueConfig::GetSeeds(
    const std::string& key, const std::vector<std::uint64_t>& fallback) const {
  return Has(key) ? ParseSeedList(values_.at(key)) : fallback;
}

std::vector<std::uint64_t> ParseSeedList(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      seeds.push_back(std::stoull(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      Fail(ErrorCode::kParse, "bad seed '" + item + "'");
    }
  }
  Require(!seeds.empty(), "seed list is empty");
  return seeds;
}

DataSplits LoadDataDir(const std::filesystem::path& dir) {
  DataSplits d;
  d.train = LoadDataset(dir / "train.jsonl", DataFormat::kJsonl, 0, SplitTag::kTrain);
  d.dev = LoadDataset(dir / "dev.jsonl", DataFormat::kJsonl, d.train.num_classes, SplitTag::kDev);
  d.test = LoadDataset(dir / "test.jsonl", DataFormat::kJsonl, d.train.num_classes, SplitTag::kTest);
  return d;
}

void SaveDataDir(const DataSplits& splits, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  SaveDataset(splits.train, dir / "train.jsonl");
  SaveDataset(splits.dev, dir / "dev.jsonl");
  SaveDataset(splits.test, dir / "test.jsonl");
}

ExperimentConfig ExperimentConfig::FromKeyValue(const KeyValueConfig& kv,
                                                const std::filesystem::path& base_dir) {
  auto resolve = [&](const std::string& p) -> std::filesystem::path {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  ExperimentConfig c;
  c.name = kv.Get("name", c.name);
  c.data_dir = resolve(kv.Require("data_dir"));
  c.difficulty = ParseDifficultyMethod(kv.Get("difficulty", "entropy"));
  c.partition = ParsePartitionMethod(kv.Get("partition", "quantile"));
  c.k = kv.GetInt("k", c.k);
  c.non_monotonic = kv.GetBool("non_monotonic", false);
  c.seeds = kv.GetSeeds("seeds", c.seeds);
  c.threads = kv.GetInt("threads", 1);

  TrainerConfig& t = c.trainer;
  t.model = ParseModel(kv.Get("model", "linear"));
  t.optimizer = ParseOptimizer(kv.Get("optimizer", "adam"));
  t.learning_rate = kv.GetReal("lr", t.learning_rate);
  t.batch_size = kv.GetInt("batch", t.batch_size);
  t.epochs = kv.GetInt("epochs", t.epochs);
  t.eval_every = kv.GetReal("eval_every", t.eval_every);
  t.strategy.kind = ParseStrategyKind(kv.Get("strategy", "curriculum"));
  t.strategy.lambda = kv.GetReal("lambda", t.strategy.lambda);
  t.strategy.alpha = kv.GetReal("alpha", t.strategy.alpha);
  t.strategy.tau = kv.GetReal("tau", t.strategy.tau);
  t.strategy.spl_growth = kv.GetReal("spl_growth", t.strategy.spl_growth);

  c.curriculum = kv.Get("curriculum", c.curriculum);
  if (c.curriculum != "inc" && c.curriculum != "anti" && c.curriculum != "constant") {
    c.curriculum = resolve(c.curriculum).string();
  }
  return c;
}

CurriculumConfig ResolveCurriculum(const std::string& spec, int k, bool non_monotonic) {
  CurriculumConfig cfg;
  if (spec == "inc" || spec == "anti" || spec == "constant") {
    cfg = Preset(spec, k);
  } else {
    cfg = LoadCurriculum(spec);
    if (cfg.k != k) {
      Fail(ErrorCode::kInvalidArgument, "curriculum " + spec + " has k=" + std::to_string(cfg.k) +
                                            " but the partition has k=" + std::to_string(k));
    }
  }
  cfg.non_monotonic = cfg.non_monotonic || non_monotonic;
  return cfg;
}

MeanStderr ComputeMeanStderr(const std::vector<double>& values) {
  MeanStderr out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  for (double v : values) out.mean += v;
  out.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

SummaryRow Summarize(const std::string& name, const std::vector<TrainReport>& reports) {
  SummaryRow row;
  row.name = name;
  row.n = reports.size();
  std::vector<double> dev, test;
  for (const auto& r : reports) {
    dev.push_back(r.best_dev_accuracy);
    test.push_back(r.test_accuracy);
  }
  row.dev = ComputeMeanStderr(dev);
  row.test = ComputeMeanStderr(test);
  return row;
}

std::string SummaryCsv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "name,n,mean_dev,stderr_dev,mean_test,stderr_test\n";
  for (const auto& r : rows) {
    os << r.name << "," << r.n << "," << FormatReal(r.dev.mean) << "," << FormatReal(r.dev.stderr_)
       << "," << FormatReal(r.test.mean) << "," << FormatReal(r.test.stderr_) << "\n";
  }
  return os.str();
}

std::vector<TrainReport> TrainSeeds(const DataSplits& data, const DifficultyPartition& partition,
                                    const TrainerConfig& cfg, const CurriculumConfig* curriculum,
                                    const std::vector<std::uint64_t>& seeds, int threads) {
  Require(!seeds.empty(), "at least one seed is required");
  std::vector<TrainReport> reports(seeds.size());
  ParallelFor(seeds.size(), threads, [&](std::size_t i) {
    TrainerConfig run = cfg;
    run.seed = seeds[i];
    reports[i] = Train(data.train, &data.dev, &data.test, &partition, run, curriculum);
  });
  return reports;
}

ExperimentResult RunExperiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                               const std::string& config_text) {
  if (!std::filesystem::exists(cfg.data_dir)) {
    Fail(ErrorCode::kIo, "data directory " + cfg.data_dir.string() + " does not exist");
  }
  const DataSplits data = LoadDataDir(cfg.data_dir);
  const DifficultyPartition partition =
      ScoreAndPartition(data.train, cfg.difficulty, cfg.partition, cfg.k, cfg.trainer);
  std::optional<CurriculumConfig> curriculum;
  if (cfg.trainer.strategy.kind == StrategyKind::kCurriculum) {
    curriculum = ResolveCurriculum(cfg.curriculum, cfg.k, cfg.non_monotonic);
  }

  ExperimentResult result;
  result.reports = TrainSeeds(data, partition, cfg.trainer, curriculum ? &*curriculum : nullptr,
                              cfg.seeds, cfg.threads);
  result.summary = Summarize(cfg.name, result.reports);
  result.summary_csv = SummaryCsv({result.summary});

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    WriteFile(out_dir / "config.txt", config_text);
    std::ostringstream seeds;
    for (auto s : cfg.seeds) seeds << s << "\n";
    WriteFile(out_dir / "seeds.txt", seeds.str());
    if (curriculum) SaveCurriculum(*curriculum, out_dir / "curriculum.json");
    std::vector<std::string> digests;
    digests.push_back("config.txt " + GitBlobDigest(config_text));
    WriteRunReports(out_dir, result.reports, &digests);
    WriteFile(out_dir / "summary.csv", result.summary_csv);
    digests.push_back("summary.csv " + GitBlobDigest(result.summary_csv));
    std::string digest_text;
    for (const auto& d : digests) digest_text += d + "\n";
    WriteFile(out_dir / "digest.txt", digest_text);
  }
  return result;
}

ExperimentResult RunExperimentFile(const std::filesystem::path& config_path,
                                   const std::filesystem::path& out_dir) {
  const KeyValueConfig kv = KeyValueConfig::Load(config_path);
  const ExperimentConfig cfg = ExperimentConfig::FromKeyValue(kv, config_path.parent_path());
  return RunExperiment(cfg, out_dir, kv.text());
}

std::string SummarizeRunDir(const std::filesystem::path& run_dir) {
  const auto reports = LoadSeedReports(run_dir);
  Require(!reports.empty(), "no seed reports under " + run_dir.string(), ErrorCode::kIo);
  std::string name = "experiment";
  if (std::filesystem::exists(run_dir / "config.txt")) {
    name = KeyValueConfig::Load(run_dir / "config.txt").Get("name", name);
  }
  return SummaryCsv({Summarize(name, reports)});
}

std::vector<SweepRow> SweepK(const DataSplits& data, DifficultyMethod difficulty,
                             PartitionMethod partition_method, const std::vector<int>& ks,
                             const TrainerConfig& cfg, const std::vector<std::uint64_t>& seeds,
                             const std::filesystem::path& out_dir, int threads) {
  for (int k : ks) Require(k >= 2, "sweep-k: k=" + std::to_string(k) + " is below 2");
  TrainerConfig run = cfg;
  run.strategy.kind = StrategyKind::kCurriculum;
  std::vector<SweepRow> rows;
  for (int k : ks) {
    Require(static_cast<std::size_t>(k) <= data.train.size(), "sweep-k: k exceeds dataset size");
    const auto partition = ScoreAndPartition(data.train, difficulty, partition_method, k, cfg);
    const auto curriculum = Preset("inc", k);
    const auto reports = TrainSeeds(data, partition, run, &curriculum, seeds, threads);
    if (!out_dir.empty()) WriteRunReports(out_dir / ("k" + std::to_string(k)), reports, nullptr);
    rows.push_back({k, Summarize("inc", reports)});
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    WriteFile(out_dir / "sweep.csv", SweepCsv(rows));
  }
  return rows;
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "k,n,mean_dev,stderr_dev,mean_test,stderr_test\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    os << r.k << "," << s.n << "," << FormatReal(s.dev.mean) << "," << FormatReal(s.dev.stderr_)
       << "," << FormatReal(s.test.mean) << "," << FormatReal(s.test.stderr_) << "\n";
  }
  return os.str();
}

std::string SummarizeSweepDir(const std::filesystem::path& out_dir) {
  std::vector<SweepRow> rows;
  for (const auto& entry : std::filesystem::directory_iterator(out_dir)) {
    const auto name = entry.path().filename().string();
    if (!entry.is_directory() || name.size() < 2 || name[0] != 'k') continue;
    if (name.find_first_not_of("0123456789", 1) != std::string::npos) continue;
    rows.push_back({std::stoi(name.substr(1)), Summarize("inc", LoadSeedReports(entry.path()))});
  }
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.k < b.k; });
  return SweepCsv(rows);
}

std::vector<std::vector<double>> RowNormalize(const std::vector<std::vector<double>>& raw) {
  std::vector<std::vector<double>> out = raw;
  for (auto& row : out) {
    if (row.empty()) continue;
    const double mx = *std::max_element(row.begin(), row.end());
    Require(mx > 0.0, "row normalization needs a positive row maximum");
    for (double& v : row) v = 100.0 * v / mx;
  }
  return out;
}

TransferResult TransferMatrix(const std::vector<NamedCurriculum>& curricula,
                              const std::vector<TransferTarget>& targets,
                              const std::vector<std::uint64_t>& seeds, int threads) {
  Require(!curricula.empty() && !targets.empty(), "transfer needs curricula and targets");
  for (const auto& t : targets) {
    for (const auto& c : curricula) {
      if (c.curriculum.k != t.partition.k) {
        Fail(ErrorCode::kInvalidArgument,
             "curriculum '" + c.name + "' has k=" + std::to_string(c.curriculum.k) +
                 " but target '" + t.name + "' has k=" + std::to_string(t.partition.k));
      }
    }
  }
  TransferResult result;
  for (const auto& t : targets) result.rows.push_back(t.name);
  for (const auto& c : curricula) result.columns.push_back(c.name);
  result.raw.assign(targets.size(), std::vector<double>(curricula.size(), 0.0));
  const std::size_t cells = targets.size() * curricula.size();
  ParallelFor(cells, threads, [&](std::size_t cell) {
    const std::size_t r = cell / curricula.size();
    const std::size_t c = cell % curricula.size();
    TrainerConfig cfg = targets[r].trainer;
    cfg.strategy.kind = StrategyKind::kCurriculum;
    const auto reports =
        TrainSeeds(targets[r].data, targets[r].partition, cfg, &curricula[c].curriculum, seeds, 1);
    result.raw[r][c] = Summarize("", reports).test.mean;
  });
  result.normalized = RowNormalize(result.raw);
  return result;
}

std::string MatrixCsv(const TransferResult& result, bool normalized) {
  const auto& m = normalized ? result.normalized : result.raw;
  std::ostringstream os;
  os << "target";
  for (const auto& c : result.columns) os << "," << c;
  os << "\n";
  for (std::size_t r = 0; r < result.rows.size(); ++r) {
    os << result.rows[r];
    for (double v : m[r]) os << "," << FormatReal(v);
    os << "\n";
  }
  return os.str();
}

TransferResult RunTransferFile(const std::filesystem::path& config_path,
                               const std::filesystem::path& out_dir) {
  const KeyValueConfig kv = KeyValueConfig::Load(config_path);
  const auto base = config_path.parent_path();
  // Gives the shared trainer/partition keys; data_dir is per target.
  KeyValueConfig shared = kv;
  if (!shared.Has("data_dir")) shared = KeyValueConfig::Parse(kv.text() + "\ndata_dir = .\n");
  const ExperimentConfig common = ExperimentConfig::FromKeyValue(shared, base);

  auto split = [](const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(Trim(item));
    return parts;
  };
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() ? base / path : path;
  };

  std::vector<NamedCurriculum> curricula;
  for (const auto& item : split(kv.Require("curricula"), ',')) {
    if (item.empty()) continue;
    const auto parts = split(item, ':');
    if (parts.size() != 2) Fail(ErrorCode::kParse, "curricula entry '" + item + "' is not name:path");
    const std::string spec = parts[1] == "inc" || parts[1] == "anti" || parts[1] == "constant"
                                 ? parts[1]
                                 : resolve(parts[1]).string();
    curricula.push_back({parts[0], ResolveCurriculum(spec, common.k, common.non_monotonic)});
  }
  std::vector<TransferTarget> targets;
  for (const auto& item : split(kv.Require("targets"), ',')) {
    if (item.empty()) continue;
    const auto parts = split(item, ':');
    if (parts.size() < 2 || parts.size() > 3) {
      Fail(ErrorCode::kParse, "targets entry '" + item + "' is not name:data_dir[:model]");
    }
    TransferTarget t;
    t.name = parts[0];
    const auto dir = resolve(parts[1]);
    if (!std::filesystem::exists(dir)) {
      Fail(ErrorCode::kIo, "data directory " + dir.string() + " does not exist");
    }
    t.data = LoadDataDir(dir);
    t.trainer = common.trainer;
    if (parts.size() == 3) t.trainer.model = ParseModel(parts[2]);
    t.partition = ScoreAndPartition(t.data.train, common.difficulty, common.partition, common.k,
                                    t.trainer);
    targets.push_back(std::move(t));
  }
  TransferResult result = TransferMatrix(curricula, targets, common.seeds, common.threads);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::string raw = MatrixCsv(result, false);
    const std::string norm = MatrixCsv(result, true);
    WriteFile(out_dir / "config.txt", kv.text());
    WriteFile(out_dir / "transfer_raw.csv", raw);
    WriteFile(out_dir / "transfer_normalized.csv", norm);
    WriteFile(out_dir / "digest.txt", "config.txt " + GitBlobDigest(kv.text()) +
                                          "\ntransfer_raw.csv " + GitBlobDigest(raw) +
                                          "\ntransfer_normalized.csv " + GitBlobDigest(norm) +
                                          "\n");
  }
  return result;
}

}  // namespace curdisc
