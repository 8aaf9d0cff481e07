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

#include "privtrain/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "nlohmann/json.hpp"
#include "privtrain/parallel.hpp"

namespace privtrain {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Per-sample contributions are summed in fixed-size chunks and the chunk sums
// are added in index order, so results do not depend on the thread count.
constexpr int64_t kChunk = 64;

struct Samples {
  RowMatrix<double> x;
  std::vector<int> y;
};

Samples Prepare(const FeatureDataset& data) {
  data.Validate();
  if (!data.labeled()) throw Error(ErrorCode::kConfig, "training data must be labeled");
  Samples s{data.features.cast<double>(), std::vector<int>(data.labels.begin(), data.labels.end())};
  return s;
}

using DirectionFn = std::function<Vector<double>(const ModelParams<double>&, int64_t)>;

Vector<double> ClippedSum(const ModelParams<double>& params, const std::vector<int64_t>& batch,
                          const DirectionFn& direction, const ClipSpec& clip, int threads,
                          double* max_norm) {
  const int64_t chunks = (static_cast<int64_t>(batch.size()) + kChunk - 1) / kChunk;
  std::vector<Vector<double>> partial(chunks);
  std::vector<double> chunk_max(chunks, 0.0);
  ParallelFor(chunks, threads, [&](int64_t c) {
    Vector<double> sum = Vector<double>::Zero(params.ParameterCount());
    const int64_t end = std::min<int64_t>((c + 1) * kChunk, batch.size());
    for (int64_t i = c * kChunk; i < end; ++i) {
      Vector<double> g = direction(params, batch[i]);
      ClipL2InPlace(g, clip);
      chunk_max[c] = std::max(chunk_max[c], g.norm());
      sum += g;
    }
    partial[c] = std::move(sum);
  });
  Vector<double> total = Vector<double>::Zero(params.ParameterCount());
  for (const auto& p : partial) total += p;
  *max_norm = chunks ? *std::max_element(chunk_max.begin(), chunk_max.end()) : 0.0;
  return total;
}

double Evaluate(const ModelParams<double>& params, const FeatureDataset* test) {
  return test ? Accuracy(params, *test) : std::numeric_limits<double>::quiet_NaN();
}

// Epsilon after `steps` identical subsampled-Gaussian steps.
class StepAccountant {
 public:
  StepAccountant(double q, double sigma, double delta) : delta_(delta) {
    const std::vector<double> alphas = DefaultAlphas();
    if (std::isinf(sigma)) {
      per_step_ = Compose({}, alphas);
      return;
    }
    const MechanismEvent event{MechanismKind::kSubsampledGaussian, sigma, 1.0, q, 1};
    per_step_ = Compose(std::span(&event, 1), alphas);
  }

  PrivacyBudget After(int64_t steps) const {
    RdpProfile total = per_step_;
    for (double& e : total.eps_at_alpha) e = steps == 0 ? 0.0 : e * static_cast<double>(steps);
    return ToEpsDelta(total, delta_);
  }

 private:
  RdpProfile per_step_;
  double delta_;
};

// Applies one update given the clipped sum; `noise` is the step's noise stream.
using UpdateFn = std::function<void(Vector<double>& flat, Vector<double>& sum, RngStream& noise)>;
// Called at the start of every step, before directions are computed.
using PreStepFn = std::function<void(const ModelParams<double>&)>;

TrainResult RunClippedLoop(const Samples& train, const FeatureDataset& train_ds,
                           ModelParams<double> model, const TrainerConfig& config,
                           const FeatureDataset* test, const TrainerHooks& hooks,
                           const DirectionFn& direction, const UpdateFn& update,
                           double accounted_sigma, const PreStepFn& pre_step = {}) {
  const int64_t n = train.x.rows();
  const double q = config.SamplingRate(n);
  const int64_t steps_per_epoch = config.StepsPerEpoch(n);
  const RngStream root(config.noise.seed);
  const StepAccountant accountant(q, accounted_sigma, config.delta);

  TrainResult result;
  result.trace.records.push_back(
      {0, MeanLoss(model, train_ds), Evaluate(model, test), accountant.After(0).epsilon});
  Vector<double> flat = model.Flatten();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (int64_t s = 0; s < steps_per_epoch; ++s) {
      RngStream sampler =
          root.Fork({static_cast<uint64_t>(StreamPurpose::kSampling), uint64_t(epoch), uint64_t(s)});
      const std::vector<int64_t> batch = PoissonSample(n, q, sampler);
      ++result.steps;
      StepInfo info{epoch, result.steps, static_cast<int64_t>(batch.size()), 0.0, &model};
      // Empty batches release nothing but still count as an accounted step.
      if (!batch.empty()) {
        if (pre_step) pre_step(model);
        Vector<double> sum =
            ClippedSum(model, batch, direction, config.clip, config.threads, &info.max_contribution_norm);
        RngStream noise =
            root.Fork({static_cast<uint64_t>(StreamPurpose::kNoise), uint64_t(epoch), uint64_t(s)});
        update(flat, sum, noise);
        if (!flat.allFinite()) {
          throw Error(ErrorCode::kNumerical,
                      fmt::format("non-finite parameters at epoch {} step {} (batch {})", epoch,
                                  s, batch.size()));
        }
        model.Unflatten(flat);
      }
      if (hooks.on_step) hooks.on_step(info);
    }
    const double loss = MeanLoss(model, train_ds);
    if (std::isnan(loss)) {
      throw Error(ErrorCode::kNumerical, fmt::format("training loss is NaN after epoch {}", epoch));
    }
    result.trace.records.push_back(
        {epoch, loss, Evaluate(model, test), accountant.After(result.steps).epsilon});
  }
  result.budget = accountant.After(result.steps);
  result.params = std::move(model);
  return result;
}

void CheckModel(const ModelParams<double>& model, const FeatureDataset& train) {
  if (model.input_dim() != train.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "model input dimension does not match features");
  }
  if (model.num_classes() != static_cast<Eigen::Index>(train.classes)) {
    throw Error(ErrorCode::kDimensionMismatch, "model class count does not match dataset");
  }
}

// Non-private minibatch SGD on a linear softmax classifier.
ModelParams<double> PlainSgd(const RowMatrix<double>& x, const std::vector<int>& y,
                             std::span<const int64_t> rows, int classes, int epochs, double lr,
                             int64_t batch, RngStream stream,
                             const std::function<void(int, const ModelParams<double>&)>& on_epoch = {}) {
  auto params = ModelParams<double>::Zeros(Arch::kLinear1Layer, x.cols(), 0, classes);
  std::vector<int64_t> order(rows.begin(), rows.end());
  batch = std::max<int64_t>(1, std::min<int64_t>(batch, order.size()));
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[stream.UniformInt(i)]);
    }
    for (size_t start = 0; start < order.size(); start += batch) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(batch));
      RowMatrix<double> gw = RowMatrix<double>::Zero(classes, x.cols());
      Vector<double> gb = Vector<double>::Zero(classes);
      for (size_t i = start; i < end; ++i) {
        const auto row = x.row(order[i]).transpose();
        Vector<double> e = OutputError<double>(Forward(params, row).logits, y[order[i]],
                                               Loss::kSoftmaxCe);
        gw.noalias() += e * row.transpose();
        gb += e;
      }
      const double scale = lr / static_cast<double>(end - start);
      params.w1 -= scale * gw;
      params.b1 -= scale * gb;
    }
    if (on_epoch) on_epoch(epoch, params);
  }
  return params;
}

}  // namespace

std::string_view FrameworkName(Framework framework) {
  switch (framework) {
    case Framework::kDpsgd: return "dpsgd";
    case Framework::kDpsgld: return "dpsgld";
    case Framework::kDpdfa: return "dpdfa";
    case Framework::kPate: return "pate";
  }
  return "unknown";
}

Framework ParseFramework(std::string_view name) {
  for (Framework f : {Framework::kDpsgd, Framework::kDpsgld, Framework::kDpdfa, Framework::kPate}) {
    if (FrameworkName(f) == name) return f;
  }
  throw Error(ErrorCode::kConfig, fmt::format("unknown framework '{}'", name));
}

std::string_view ArchName(Arch arch) {
  return arch == Arch::kLinear1Layer ? "linear_1layer" : "mlp_2layer";
}

Arch ParseArch(std::string_view name) {
  if (name == "linear_1layer") return Arch::kLinear1Layer;
  if (name == "mlp_2layer") return Arch::kMlp2Layer;
  throw Error(ErrorCode::kConfig, fmt::format("unknown architecture '{}'", name));
}

TrainerConfig TrainerConfig::LargeScalePreset() {
  TrainerConfig config;
  config.clip.threshold = 1.0;
  return config;
}

void TrainerConfig::Validate(int64_t n) const {
  if (n < 1) throw Error(ErrorCode::kEmptyDataset, "training set is empty");
  if (!(clip.threshold > 0.0)) throw Error(ErrorCode::kConfig, "clip threshold C must be > 0");
  // DPSGLD admits lr = 0 (frozen weights).
  const bool lr_ok = framework == Framework::kDpsgld ? lr >= 0.0 : lr > 0.0;
  if (!lr_ok || !std::isfinite(lr)) throw Error(ErrorCode::kConfig, "learning rate must be > 0");
  if (expected_batch < 1 || expected_batch > n) {
    throw Error(ErrorCode::kConfig,
                fmt::format("expected batch {} must lie in [1, N = {}]", expected_batch, n));
  }
  if (epochs < 0) throw Error(ErrorCode::kConfig, "epochs must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::kConfig, "delta must lie in (0, 1)");
  if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) {
    throw Error(ErrorCode::kConfig, "sigma must be finite and >= 0");
  }
  const double effective_sigma = framework == Framework::kPate ? pate.agg_noise : noise.sigma;
  if (effective_sigma == 0.0 && !test_mode) {
    throw Error(ErrorCode::kConfig, "zero noise is only permitted in test mode");
  }
  if (arch == Arch::kMlp2Layer && hidden_dim < 1) {
    throw Error(ErrorCode::kConfig, "hidden_dim must be >= 1");
  }
  if (threads < 1) throw Error(ErrorCode::kConfig, "threads must be >= 1");
  if (framework == Framework::kDpdfa) {
    if (arch != Arch::kMlp2Layer) {
      throw Error(ErrorCode::kConfig, "dpdfa trains the 2-layer MLP; arch must be mlp_2layer");
    }
    if (!(dfa.activation_clip > 0.0) || !(dfa.error_clip > 0.0) || !(dfa.feedback_scale >= 0.0) ||
        !(dfa.feedback_init_std >= 0.0)) {
      throw Error(ErrorCode::kConfig, "dfa clips must be > 0 and scales >= 0");
    }
  }
  if (framework == Framework::kPate) {
    if (arch != Arch::kLinear1Layer) {
      throw Error(ErrorCode::kConfig, "pate teachers and student are linear_1layer");
    }
    if (pate.teachers < 2 || pate.teachers > n) {
      throw Error(ErrorCode::kConfig, fmt::format("teacher count must lie in [2, N = {}]", n));
    }
    if (pate.queries < 1) throw Error(ErrorCode::kConfig, "pate queries must be >= 1");
    if (!(pate.agg_noise >= 0.0)) throw Error(ErrorCode::kConfig, "agg_noise must be >= 0");
    if (pate.teacher_epochs < 0 || !(pate.teacher_lr > 0.0) || pate.teacher_batch < 1) {
      throw Error(ErrorCode::kConfig, "invalid teacher training budget");
    }
  }
}

double TrainerConfig::SamplingRate(int64_t n) const {
  return static_cast<double>(expected_batch) / static_cast<double>(n);
}

int64_t TrainerConfig::StepsPerEpoch(int64_t n) const {
  return (n + expected_batch - 1) / expected_batch;
}

std::string TrainingTrace::ToCsv() const {
  std::string out = "epoch,loss,test_acc,epsilon\n";
  for (const auto& r : records) {
    out += fmt::format("{},{:.10g},{:.10g},{:.10g}\n", r.epoch, r.train_loss, r.test_accuracy,
                       r.epsilon);
  }
  return out;
}

nlohmann::json TrainingTrace::ToJson() const {
  auto number = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return "inf";
    return v;
  };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : records) {
    rows.push_back({{"epoch", r.epoch},
                    {"loss", number(r.train_loss)},
                    {"test_acc", number(r.test_accuracy)},
                    {"epsilon", number(r.epsilon)}});
  }
  return rows;
}

std::optional<size_t> TrainingTrace::BestEpochWithin(double epsilon_budget) const {
  std::optional<size_t> best;
  for (size_t i = 0; i < records.size(); ++i) {
    if (!(records[i].epsilon <= epsilon_budget) || std::isnan(records[i].test_accuracy)) continue;
    if (!best || records[i].test_accuracy > records[*best].test_accuracy) best = i;
  }
  return best;
}

SgdEquivalent SgldParamMap(double lr, double clip, int64_t batch, int64_t n) {
  if (!(lr > 0.0) || !(clip > 0.0) || batch < 1 || n < 1) {
    throw Error(ErrorCode::kInvalidParameter, "SGLD mapping needs positive lr, C, |B| and N");
  }
  if (batch > n) throw Error(ErrorCode::kInvalidParameter, "batch size exceeds dataset size");
  const double nd = static_cast<double>(n);
  return {lr * nd, static_cast<double>(batch) / (nd * std::sqrt(lr) * clip), clip};
}

double Accuracy(const ModelParams<double>& params, const FeatureDataset& data) {
  if (!data.labeled()) throw Error(ErrorCode::kConfig, "accuracy needs a labeled dataset");
  int64_t correct = 0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const Vector<double> x = data.features.row(i).cast<double>().transpose();
    if (Predict(params, x) == static_cast<int>(data.labels[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double MeanLoss(const ModelParams<double>& params, const FeatureDataset& data) {
  if (!data.labeled()) return std::numeric_limits<double>::quiet_NaN();
  const Loss loss = DefaultLoss(params.arch);
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const Vector<double> x = data.features.row(i).cast<double>().transpose();
    total += SampleLoss(params, x, static_cast<int>(data.labels[i]), loss);
  }
  return total / static_cast<double>(data.size());
}

TrainResult TrainDpsgd(const FeatureDataset& train, ModelParams<double> model,
                       const TrainerConfig& config, const FeatureDataset* test,
                       const TrainerHooks& hooks) {
  config.Validate(train.size());
  CheckModel(model, train);
  const Samples samples = Prepare(train);
  const Loss loss = DefaultLoss(model.arch);
  const double scale = config.lr / static_cast<double>(config.expected_batch);
  auto direction = [&](const ModelParams<double>& p, int64_t i) {
    return PerSampleGrad(p, samples.x.row(i).transpose(), samples.y[i], loss);
  };
  auto update = [&](Vector<double>& flat, Vector<double>& sum, RngStream& noise) {
    GaussianPerturbInPlace(sum, config.noise, config.clip.threshold, noise);
    flat -= scale * sum;
  };
  return RunClippedLoop(samples, train, std::move(model), config, test, hooks, direction, update,
                        config.noise.sigma);
}

TrainResult TrainDpsgld(const FeatureDataset& train, ModelParams<double> model,
                        const TrainerConfig& config, const FeatureDataset* test,
                        const TrainerHooks& hooks) {
  config.Validate(train.size());
  CheckModel(model, train);
  const Samples samples = Prepare(train);
  const Loss loss = DefaultLoss(model.arch);
  const int64_t n = train.size();
  const double drift = config.lr * static_cast<double>(n) / static_cast<double>(config.expected_batch);
  const double diffusion = std::sqrt(config.lr);
  // With lr = 0 nothing is released beyond the initial weights.
  const double accounted_sigma =
      config.lr > 0.0
          ? SgldParamMap(config.lr, config.clip.threshold, config.expected_batch, n).sigma
          : kInf;
  auto direction = [&](const ModelParams<double>& p, int64_t i) {
    return PerSampleGrad(p, samples.x.row(i).transpose(), samples.y[i], loss);
  };
  auto update = [&](Vector<double>& flat, Vector<double>& sum, RngStream& noise) {
    flat -= drift * sum;
    if (diffusion == 0.0) return;
    // Same draws, same order as the DPSGD perturbation.
    for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) -= diffusion * noise.Normal();
  };
  return RunClippedLoop(samples, train, std::move(model), config, test, hooks, direction, update,
                        accounted_sigma);
}

TrainResult TrainDpdfa(const FeatureDataset& train, ModelParams<double> model,
                       const TrainerConfig& config, const FeatureDataset* test,
                       const TrainerHooks& hooks) {
  config.Validate(train.size());
  if (model.arch != Arch::kMlp2Layer) {
    throw Error(ErrorCode::kConfig, "dpdfa requires a mlp_2layer model");
  }
  CheckModel(model, train);
  const Samples samples = Prepare(train);
  const RngStream root(config.noise.seed);
  RngStream fb_stream = root.Fork(StreamPurpose::kFeedback);
  const double init_std = config.dfa.feedback_init_std > 0.0
                              ? config.dfa.feedback_init_std
                              : 1.0 / std::sqrt(static_cast<double>(model.num_classes()));
  FeedbackMatrix<double> feedback =
      MakeFeedback<double>(model.hidden_dim(), model.num_classes(), init_std, fb_stream);
  if (config.dfa.feedback_scale > 0.0) ScaleToSpectralNorm(feedback, config.dfa.feedback_scale);
  const DfaClip clip{config.dfa.activation_clip, config.dfa.error_clip};
  const double scale = config.lr / static_cast<double>(config.expected_batch);

  auto direction = [&](const ModelParams<double>& p, int64_t i) {
    return DfaDirections(p, feedback, samples.x.row(i).transpose(), samples.y[i], clip);
  };
  auto update = [&](Vector<double>& flat, Vector<double>& sum, RngStream& noise) {
    GaussianPerturbInPlace(sum, config.noise, config.clip.threshold, noise);
    flat -= scale * sum;
  };
  PreStepFn pre_step;
  if (config.dfa.sync_feedback_to_w2) {
    pre_step = [&feedback](const ModelParams<double>& p) { feedback.b = p.w2.transpose(); };
  }
  TrainResult result = RunClippedLoop(samples, train, std::move(model), config, test, hooks,
                                      direction, update, config.noise.sigma, pre_step);
  result.feedback = std::move(feedback);
  return result;
}

std::vector<std::vector<int64_t>> PartitionShards(int64_t n, int64_t teachers, RngStream& stream) {
  if (teachers < 1 || teachers > n) {
    throw Error(ErrorCode::kInvalidParameter, "teacher count must lie in [1, n]");
  }
  std::vector<int64_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int64_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[stream.UniformInt(i)]);
  const int64_t shard = n / teachers;
  std::vector<std::vector<int64_t>> shards(teachers);
  for (int64_t t = 0; t < teachers; ++t) {
    shards[t].assign(perm.begin() + t * shard, perm.begin() + (t + 1) * shard);
  }
  return shards;
}

VoteHistogram TeacherVotes(const std::vector<ModelParams<double>>& teachers,
                           const Vector<double>& x, int classes) {
  VoteHistogram hist{std::vector<int64_t>(classes, 0)};
  for (const auto& t : teachers) ++hist.counts[Predict(t, x)];
  return hist;
}

std::vector<ModelParams<double>> TrainPateTeachers(const FeatureDataset& private_set,
                                                   const TrainerConfig& config) {
  const Samples samples = Prepare(private_set);
  const int classes = static_cast<int>(private_set.classes);
  const RngStream root(config.noise.seed);
  RngStream shuffle = root.Fork(StreamPurpose::kShuffle);
  const auto shards = PartitionShards(private_set.size(), config.pate.teachers, shuffle);
  std::vector<ModelParams<double>> teachers(shards.size());
  ParallelFor(static_cast<int64_t>(shards.size()), config.threads, [&](int64_t t) {
    teachers[t] = PlainSgd(samples.x, samples.y, shards[t], classes, config.pate.teacher_epochs,
                           config.pate.teacher_lr, config.pate.teacher_batch,
                           root.Fork({static_cast<uint64_t>(StreamPurpose::kShuffle), 1, uint64_t(t)}));
  });
  return teachers;
}

std::vector<int> PateAggregate(const std::vector<ModelParams<double>>& teachers,
                               const RowMatrix<double>& queries, int classes,
                               const TrainerConfig& config) {
  const RngStream root(config.noise.seed);
  std::vector<int> released(queries.rows());
  ParallelFor(queries.rows(), config.threads, [&](int64_t i) {
    const VoteHistogram hist = TeacherVotes(teachers, queries.row(i).transpose(), classes);
    RngStream agg = root.Fork({static_cast<uint64_t>(StreamPurpose::kAggregation), uint64_t(i)});
    released[i] = NoisyArgmax(hist, config.pate.agg_noise, agg);
  });
  return released;
}

TrainResult TrainPate(const FeatureDataset& private_set, const FeatureMatrix& public_unlabeled,
                      const TrainerConfig& config, const FeatureDataset* test) {
  config.Validate(private_set.size());
  if (config.framework != Framework::kPate) {
    throw Error(ErrorCode::kConfig, "TrainPate needs framework = pate");
  }
  if (config.pate.queries > public_unlabeled.rows()) {
    throw Error(ErrorCode::kConfig,
                fmt::format("{} queries requested but only {} public samples", config.pate.queries,
                            public_unlabeled.rows()));
  }
  if (public_unlabeled.cols() != private_set.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "public and private feature dimensions differ");
  }
  const int64_t queries = config.pate.queries;
  const std::vector<ModelParams<double>> teachers = TrainPateTeachers(private_set, config);
  const RowMatrix<double> student_x = public_unlabeled.topRows(queries).cast<double>();
  std::vector<int> released =
      PateAggregate(teachers, student_x, static_cast<int>(private_set.classes), config);
  const RngStream root(config.noise.seed);
  const int classes = static_cast<int>(private_set.classes);

  const MechanismEvent event{MechanismKind::kGaussianNoisyMax, config.pate.agg_noise,
                             kVoteSensitivity, 1.0, queries};
  const PrivacyBudget budget = ToEpsDelta(Compose(std::span(&event, 1), DefaultAlphas()), config.delta);

  FeatureDataset student_set;
  student_set.features = public_unlabeled.topRows(queries);
  student_set.labels.assign(released.begin(), released.end());
  student_set.classes = private_set.classes;

  TrainResult result;
  auto zero = ModelParams<double>::Zeros(Arch::kLinear1Layer, private_set.dim(), 0, classes);
  result.trace.records.push_back({0, MeanLoss(zero, student_set), Evaluate(zero, test), budget.epsilon});
  std::vector<int64_t> rows(queries);
  std::iota(rows.begin(), rows.end(), 0);
  result.params = PlainSgd(
      student_x, released, rows, classes, config.epochs, config.lr, config.expected_batch,
      root.Fork({static_cast<uint64_t>(StreamPurpose::kShuffle), 2}),
      [&](int epoch, const ModelParams<double>& p) {
        result.trace.records.push_back({epoch, MeanLoss(p, student_set), Evaluate(p, test), budget.epsilon});
      });
  result.budget = budget;
  result.steps = queries;
  result.released_labels = std::move(released);
  return result;
}

TrainResult Train(const FeatureDataset& train, const TrainerConfig& config,
                  const FeatureDataset* test, const FeatureMatrix* public_unlabeled,
                  const TrainerHooks& hooks) {
  config.Validate(train.size());
  if (!train.labeled()) throw Error(ErrorCode::kConfig, "training data must be labeled");
  if (test && test->dim() != train.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "train and test feature dimensions differ");
  }
  if (config.framework == Framework::kPate) {
    if (!public_unlabeled) throw Error(ErrorCode::kConfig, "pate needs a public dataset");
    return TrainPate(train, *public_unlabeled, config, test);
  }
  RngStream init = RngStream(config.noise.seed).Fork(StreamPurpose::kInit);
  ModelParams<double> model =
      InitParams<double>(config.arch, train.dim(), config.hidden_dim, train.classes, init);
  switch (config.framework) {
    case Framework::kDpsgd: return TrainDpsgd(train, std::move(model), config, test, hooks);
    case Framework::kDpsgld: return TrainDpsgld(train, std::move(model), config, test, hooks);
    case Framework::kDpdfa: return TrainDpdfa(train, std::move(model), config, test, hooks);
    case Framework::kPate: break;
  }
  throw Error(ErrorCode::kConfig, "unknown framework");
}

}  // namespace privtrain
