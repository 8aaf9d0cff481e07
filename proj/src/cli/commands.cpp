// Copyright 2026 The privtrain Authors
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
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "privtrain/accountant.hpp"
#include "privtrain/augment.hpp"
#include "privtrain/binary_io.hpp"
#include "privtrain/checkpoint.hpp"
#include "privtrain/cli.hpp"
#include "privtrain/dataset.hpp"
#include "privtrain/harmonic.hpp"
#include "privtrain/image.hpp"
#include "privtrain/parallel.hpp"
#include "privtrain/trainers.hpp"

namespace privtrain::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int64_t kExtractChunk = 1024;

// Removes a freshly created run directory unless Commit() is called.
class RunGuard {
 public:
  explicit RunGuard(fs::path dir) : dir_(std::move(dir)) {}
  ~RunGuard() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(dir_, ec);
    }
  }
  RunGuard(const RunGuard&) = delete;
  RunGuard& operator=(const RunGuard&) = delete;

  const fs::path& dir() const { return dir_; }
  void Commit() { committed_ = true; }

 private:
  fs::path dir_;
  bool committed_ = false;
};

void WriteJson(const fs::path& path, const json& value) {
  binary::WriteFileAtomic(path.string(), value.dump(1) + "\n");
}

json Number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double OptionalDouble(const json& v, double fallback) {
  return v.is_null() ? fallback : v.get<double>();
}

int Threads(const json& config) {
  const int t = config["threads"].get<int>();
  if (t < 0) throw Error(ErrorCode::kConfig, "threads must be >= 0");
  return t == 0 ? DefaultThreadCount() : t;
}

std::vector<std::string> SplitList(const json& v) {
  std::vector<std::string> out;
  if (v.is_null()) return out;
  std::stringstream in(v.get<std::string>());
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> SplitNumbers(const json& v, std::string_view key) {
  std::vector<double> out;
  for (const auto& s : SplitList(v)) {
    OptionSpec spec;
    spec.key = key;
    spec.type = OptionType::kFloat;
    out.push_back(ParseValue(spec, s).get<double>());
  }
  return out;
}

HarmonicOptions ExtractorOptions(const json& c) {
  HarmonicOptions o;
  o.stages = c["stages"].get<int>();
  o.pool = c["pool"].get<int>();
  o.max_dim = c["max_dim"].get<int64_t>();
  if (o.stages < 1 || o.pool < 1) throw Error(ErrorCode::kConfig, "stages and pool must be >= 1");
  return o;
}

// Dimension of the features for images of the given geometry; throws before
// any work if the extractor cannot run on them.
int64_t CheckExtractor(int height, int width, int channels, const DctFilterBank<double>& bank,
                       const HarmonicOptions& options) {
  const int64_t dim = HarmonicOutputDim(channels, bank.kernel_size, options);
  if (dim < 0) {
    throw Error(ErrorCode::kConfig,
                fmt::format("feature dimension exceeds max_dim {}", options.max_dim));
  }
  HarmonicExtract(Image(height, width, 1), bank, {options.stages, options.pool, options.max_dim});
  return dim;
}

// Extracts features for indices [0, count) in parallel chunks and appends
// them in index order.
void StreamFeatures(FeatureFileWriter& writer, int64_t count, int64_t dim, int threads,
                    const std::function<Vector<double>(int64_t)>& features_of) {
  std::vector<float> rows;
  for (int64_t start = 0; start < count; start += kExtractChunk) {
    const int64_t n = std::min(kExtractChunk, count - start);
    rows.assign(static_cast<size_t>(n * dim), 0.0f);
    ParallelFor(n, threads, [&](int64_t i) {
      const Vector<double> f = features_of(start + i);
      if (f.size() != dim) throw Error(ErrorCode::kDimensionMismatch, "feature width changed");
      for (int64_t j = 0; j < dim; ++j) rows[i * dim + j] = static_cast<float>(f(j));
    });
    for (int64_t i = 0; i < n; ++i) {
      writer.AppendRow(std::span<const float>(rows.data() + i * dim, static_cast<size_t>(dim)));
    }
  }
}

bool IsImageFile(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

std::vector<fs::path> ImagesIn(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && IsImageFile(e.path())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FeatureDataset LoadLabeled(const json& path, std::string_view role) {
  FeatureDataset ds = ReadFeatures(path.get<std::string>());
  if (!ds.labeled()) {
    throw Error(ErrorCode::kConfig, fmt::format("{} features must be labeled", role));
  }
  return ds;
}

TrainerConfig MakeTrainerConfig(const json& c) {
  TrainerConfig t;
  t.framework = ParseFramework(c["framework"].get<std::string>());
  const std::string arch = c["arch"].get<std::string>();
  if (arch == "auto") {
    t.arch = t.framework == Framework::kDpdfa ? Arch::kMlp2Layer : Arch::kLinear1Layer;
  } else {
    t.arch = ParseArch(arch);
  }
  t.hidden_dim = c["hidden_dim"].get<int64_t>();
  t.clip.threshold = c["clip"].get<double>();
  t.lr = c["lr"].get<double>();
  t.expected_batch = c["batch"].get<int64_t>();
  t.epochs = c["epochs"].get<int>();
  t.delta = c["delta"].get<double>();
  t.noise.seed = c["seed"].get<uint64_t>();
  t.test_mode = c["test_mode"].get<bool>();
  t.threads = Threads(c);
  t.dfa.activation_clip = OptionalDouble(c["dfa_activation_clip"], kInf);
  t.dfa.error_clip = OptionalDouble(c["dfa_error_clip"], kInf);
  t.dfa.feedback_scale = c["dfa_feedback_scale"].get<double>();
  t.dfa.feedback_init_std = c["dfa_feedback_init_std"].get<double>();
  t.pate.teachers = c["pate_teachers"].get<int64_t>();
  t.pate.queries = c["pate_queries"].get<int64_t>();
  t.pate.teacher_epochs = c["pate_teacher_epochs"].get<int>();
  t.pate.teacher_lr = c["pate_teacher_lr"].get<double>();
  t.pate.teacher_batch = c["pate_teacher_batch"].get<int64_t>();
  const double sigma = c["sigma"].get<double>();
  if (t.framework == Framework::kPate) {
    t.pate.agg_noise = sigma;
  } else {
    t.noise.sigma = sigma;
  }
  return t;
}

struct TrainData {
  FeatureDataset train;
  std::optional<FeatureDataset> test;
  std::optional<FeatureMatrix> public_features;
};

TrainData LoadTrainData(const json& c) {
  TrainData in;
  in.train = LoadLabeled(c["train"], "train");
  if (!c["test"].is_null()) {
    in.test = LoadLabeled(c["test"], "test");
    if (in.test->dim() != in.train.dim() || in.test->classes != in.train.classes) {
      throw Error(ErrorCode::kDimensionMismatch, "test features do not match the training set");
    }
  }
  if (!c["public"].is_null()) {
    in.public_features = ReadFeatures(c["public"].get<std::string>()).features;
  }
  return in;
}

void CheckTrainConfig(const TrainerConfig& t, const TrainData& data) {
  if (t.framework == Framework::kPate && !data.public_features) {
    throw Error(ErrorCode::kConfig, "pate needs public features (--public)");
  }
  t.Validate(data.train.size());
}

json TrainSummary(const TrainerConfig& t, const TrainResult& r, double budget) {
  const auto best = r.trace.BestEpochWithin(budget);
  return {{"framework", FrameworkName(t.framework)},
          {"arch", ArchName(t.arch)},
          {"steps", r.steps},
          {"epsilon", Number(r.budget.epsilon)},
          {"delta", r.budget.delta},
          {"argmin_alpha", r.budget.argmin_alpha},
          {"final_test_accuracy", Number(r.trace.records.back().test_accuracy)},
          {"epsilon_budget", Number(budget)},
          {"best_epoch", best ? json(r.trace.records[*best].epoch) : json(nullptr)},
          {"best_test_accuracy", best ? Number(r.trace.records[*best].test_accuracy) : json(nullptr)}};
}

// Runs a validated training config and writes its artifacts into dir.
json TrainInto(const json& c, const TrainData& in, const TrainerConfig& t, const fs::path& dir) {
  WriteJson(dir / "config.json", ArchivedConfig("train", c));
  const TrainResult r = Train(in.train, t, in.test ? &*in.test : nullptr,
                              in.public_features ? &*in.public_features : nullptr);
  WriteCheckpoint({r.params, r.feedback}, (dir / "model.pvtm").string());
  binary::WriteFileAtomic((dir / "trace.csv").string(), r.trace.ToCsv());
  WriteJson(dir / "trace.json", r.trace.ToJson());
  const json summary = TrainSummary(t, r, OptionalDouble(c["epsilon_budget"], kInf));
  WriteJson(dir / "summary.json", summary);
  return summary;
}

// Smallest noise level on a log grid whose epsilon is <= target.
double SolveNoise(double target, const std::function<double(double)>& epsilon_of) {
  double lo = 1e-2, hi = 1e4;
  if (epsilon_of(hi) > target) {
    throw Error(ErrorCode::kConfig, fmt::format("epsilon {} is unreachable", target));
  }
  if (epsilon_of(lo) <= target) return lo;
  for (int i = 0; i < 100 && hi / lo > 1 + 1e-12; ++i) {
    const double mid = std::sqrt(lo * hi);
    (epsilon_of(mid) <= target ? hi : lo) = mid;
  }
  return hi;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

std::string CsvNumber(double v) { return std::isnan(v) ? "" : fmt::format("{:.10g}", v); }

}  // namespace

CommandResult CmdSynth(const json& c) {
  const Image source = ReadImage(c["input"].get<std::string>());
  AugmentSpec spec;
  spec.output_count = c["count"].get<int64_t>();
  spec.output_height = c["height"].get<int>();
  spec.output_width = c["width"].get<int>();
  spec.crop_scale = {c["crop_min"].get<double>(), c["crop_max"].get<double>()};
  spec.rotation_degrees = c["rotation"].get<double>();
  spec.contrast = {c["contrast_min"].get<double>(), c["contrast_max"].get<double>()};
  spec.noise_std = c["noise_std"].get<double>();
  spec.seed = c["seed"].get<uint64_t>();
  spec.Validate();
  CheckAugmentGeometry(source, spec);
  const auto bank = BuildDctBank(c["kernel"].get<int>());
  const HarmonicOptions options = ExtractorOptions(c);
  const int64_t dim =
      CheckExtractor(spec.output_height, spec.output_width, source.channels, bank, options);
  const int threads = Threads(c);

  RunGuard run(CreateRunDir("synth", c));
  WriteJson(run.dir() / "config.json", ArchivedConfig("synth", c));
  const fs::path out = run.dir() / "features.pvtf";
  FeatureFileWriter writer(out.string(), spec.output_count, static_cast<uint32_t>(dim), 0);
  StreamFeatures(writer, spec.output_count, dim, threads, [&](int64_t i) {
    return HarmonicExtract(AugmentOne(source, spec, i), bank, options);
  });
  writer.Finish(std::vector<uint32_t>(spec.output_count, 0));
  const json summary = {{"features", out.string()}, {"n", spec.output_count}, {"dim", dim}};
  WriteJson(run.dir() / "summary.json", summary);
  run.Commit();
  return {run.dir(), summary};
}

CommandResult CmdExtract(const json& c) {
  const fs::path input = c["input"].get<std::string>();
  std::vector<fs::path> files;
  std::vector<uint32_t> labels;
  std::vector<std::string> class_names;
  if (fs::is_directory(input)) {
    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(input)) {
      if (e.is_directory()) subdirs.push_back(e.path());
    }
    std::sort(subdirs.begin(), subdirs.end());
    if (subdirs.empty()) {
      files = ImagesIn(input);
    } else {
      for (const auto& d : subdirs) {
        for (auto& f : ImagesIn(d)) {
          files.push_back(std::move(f));
          labels.push_back(static_cast<uint32_t>(class_names.size()));
        }
        class_names.push_back(d.filename().string());
      }
    }
  } else {
    files.push_back(input);
  }
  if (files.empty()) throw Error(ErrorCode::kEmptyDataset, "no images under " + input.string());
  const uint32_t classes = static_cast<uint32_t>(class_names.size());
  if (labels.empty()) labels.assign(files.size(), 0);

  const auto bank = BuildDctBank(c["kernel"].get<int>());
  const HarmonicOptions options = ExtractorOptions(c);
  const Image first = ReadImage(files.front().string());
  const int64_t dim = CheckExtractor(first.height, first.width, first.channels, bank, options);
  const int threads = Threads(c);

  RunGuard run(CreateRunDir("extract", c));
  WriteJson(run.dir() / "config.json", ArchivedConfig("extract", c));
  const fs::path out = run.dir() / "features.pvtf";
  FeatureFileWriter writer(out.string(), files.size(), static_cast<uint32_t>(dim), classes);
  StreamFeatures(writer, static_cast<int64_t>(files.size()), dim, threads, [&](int64_t i) {
    return HarmonicExtract(ReadImage(files[i].string()), bank, options);
  });
  writer.Finish(labels);
  const json summary = {{"features", out.string()}, {"n", files.size()}, {"dim", dim},
                        {"classes", class_names}};
  WriteJson(run.dir() / "summary.json", summary);
  run.Commit();
  return {run.dir(), summary};
}

CommandResult CmdTrain(const json& c) {
  const TrainerConfig t = MakeTrainerConfig(c);
  const TrainData data = LoadTrainData(c);
  CheckTrainConfig(t, data);
  RunGuard run(CreateRunDir("train", c));
  const json summary = TrainInto(c, data, t, run.dir());
  run.Commit();
  return {run.dir(), summary};
}

CommandResult CmdAccount(const json& c) {
  const double q = c["q"].get<double>();
  const double sigma = c["sigma"].get<double>();
  const int64_t steps = c["steps"].get<int64_t>();
  const double delta = c["delta"].get<double>();
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::kConfig, "q must lie in [0, 1]");
  if (!(sigma > 0.0)) throw Error(ErrorCode::kConfig, "sigma must be > 0");
  if (steps < 0) throw Error(ErrorCode::kConfig, "steps must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::kConfig, "delta must lie in (0, 1)");
  const PrivacyBudget budget = AccountTraining(q, sigma, steps, delta);
  RunGuard run(CreateRunDir("account", c));
  WriteJson(run.dir() / "config.json", ArchivedConfig("account", c));
  json summary = budget;
  summary["q"] = q;
  summary["sigma"] = sigma;
  summary["steps"] = steps;
  WriteJson(run.dir() / "account.json", summary);
  run.Commit();
  return {run.dir(), summary};
}

CommandResult CmdSweep(const json& c) {
  const std::vector<std::string> frameworks = SplitList(c["frameworks"]);
  const std::vector<double> sigmas = SplitNumbers(c["sigmas"], "sigmas");
  const std::vector<double> targets = SplitNumbers(c["target_epsilons"], "target_epsilons");
  if (frameworks.empty()) throw Error(ErrorCode::kConfig, "frameworks is empty");
  for (const auto& f : frameworks) ParseFramework(f);
  if (sigmas.empty() == targets.empty()) {
    throw Error(ErrorCode::kConfig, "give exactly one of sigmas and target_epsilons");
  }
  const bool by_target = !targets.empty();
  const std::vector<double>& levels = by_target ? targets : sigmas;

  // Shared inputs, validated once against every framework of the grid.
  json base = c;
  for (const char* key : {"frameworks", "sigmas", "target_epsilons", "out_root", "run_dir"}) {
    base.erase(key);
  }
  base["out_root"] = nullptr;
  base["run_dir"] = nullptr;
  base["sigma"] = 1.0;
  std::vector<json> point_configs;
  std::vector<std::string> point_errors;
  const TrainData data = LoadTrainData(c);
  const uint64_t seed = c["seed"].get<uint64_t>();
  for (const auto& fw : frameworks) {
    for (double level : levels) {
      json p = base;
      p["framework"] = fw;
      p["seed"] = seed + point_configs.size();
      std::string error;
      try {
        TrainerConfig t = MakeTrainerConfig(p);
        const int64_t n = data.train.size();
        const double q = t.SamplingRate(n);
        const int64_t steps = t.epochs * t.StepsPerEpoch(n);
        double sigma = level;
        if (by_target) {
          if (t.framework == Framework::kPate) {
            sigma = SolveNoise(level, [&](double s) {
              const MechanismEvent e{MechanismKind::kGaussianNoisyMax, s, kVoteSensitivity, 1.0,
                                     t.pate.queries};
              return ToEpsDelta(Compose(std::span(&e, 1), DefaultAlphas()), t.delta).epsilon;
            });
          } else {
            sigma = SolveNoise(level, [&](double s) {
              return AccountTraining(q, s, steps, t.delta).epsilon;
            });
          }
        }
        p["sigma"] = sigma;
        if (t.framework == Framework::kDpsgld) {
          // The Langevin step size that maps onto this noise multiplier.
          const double ratio = static_cast<double>(t.expected_batch) /
                               (static_cast<double>(n) * sigma * t.clip.threshold);
          p["lr"] = ratio * ratio;
        }
        CheckTrainConfig(MakeTrainerConfig(p), data);
      } catch (const Error& e) {
        error = e.what();
      }
      point_configs.push_back(std::move(p));
      point_errors.push_back(std::move(error));
    }
  }

  RunGuard run(CreateRunDir("sweep", c));
  WriteJson(run.dir() / "config.json", ArchivedConfig("sweep", c));
  std::string csv =
      "index,framework,arch,sigma,target_epsilon,lr,seed,status,epsilon,best_epoch,"
      "best_test_accuracy,final_test_accuracy,error\n";
  json points = json::array();
  int failed = 0;
  for (size_t i = 0; i < point_configs.size(); ++i) {
    json& p = point_configs[i];
    const double target = by_target ? levels[i % levels.size()] : kInf;
    if (by_target) p["epsilon_budget"] = target;
    const fs::path dir = run.dir() / fmt::format("point-{:03d}", i);
    p["run_dir"] = dir.string();
    json summary;
    std::string error = point_errors[i];
    if (error.empty()) {
      try {
        fs::create_directories(dir);
        summary = TrainInto(p, data, MakeTrainerConfig(p), dir);
      } catch (const std::exception& e) {
        error = e.what();
      }
    }
    const bool ok = error.empty();
    failed += !ok;
    auto field = [&](const char* key) -> std::string {
      if (!ok || summary[key].is_null()) return "";
      const json& v = summary[key];
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    const std::string arch = ok ? summary["arch"].get<std::string>() : "";
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", i,
                       p["framework"].get<std::string>(), arch, CsvNumber(p["sigma"]),
                       by_target ? CsvNumber(target) : "", CsvNumber(p["lr"]),
                       p["seed"].get<uint64_t>(), ok ? "ok" : "failed", field("epsilon"),
                       field("best_epoch"), field("best_test_accuracy"),
                       field("final_test_accuracy"), CsvField(error));
    points.push_back({{"index", i}, {"status", ok ? "ok" : "failed"}, {"run_dir", dir.string()},
                      {"summary", summary}, {"error", error}});
  }
  binary::WriteFileAtomic((run.dir() / "sweep.csv").string(), csv);
  const json summary = {{"points", points.size()}, {"failed", failed},
                        {"csv", (run.dir() / "sweep.csv").string()}};
  WriteJson(run.dir() / "sweep.json", points);
  run.Commit();
  return {run.dir(), summary};
}

CommandResult CmdEvaluate(const json& c) {
  const Checkpoint ckpt = ReadCheckpoint(c["model"].get<std::string>());
  const FeatureDataset data = LoadLabeled(c["data"], "evaluation");
  if (ckpt.params.input_dim() != data.dim() ||
      ckpt.params.num_classes() != static_cast<Eigen::Index>(data.classes)) {
    throw Error(ErrorCode::kDimensionMismatch, "checkpoint does not match the feature file");
  }
  RunGuard run(CreateRunDir("evaluate", c));
  WriteJson(run.dir() / "config.json", ArchivedConfig("evaluate", c));
  const json summary = {{"n", data.size()},
                        {"accuracy", Accuracy(ckpt.params, data)},
                        {"loss", Number(MeanLoss(ckpt.params, data))}};
  WriteJson(run.dir() / "evaluate.json", summary);
  run.Commit();
  return {run.dir(), summary};
}

}  // namespace privtrain::cli
