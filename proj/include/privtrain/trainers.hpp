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

#ifndef PRIVTRAIN_TRAINERS_HPP_
#define PRIVTRAIN_TRAINERS_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlohmann/json_fwd.hpp"
#include "privtrain/accountant.hpp"
#include "privtrain/dataset.hpp"
#include "privtrain/mechanisms.hpp"
#include "privtrain/models.hpp"

namespace privtrain {

enum class Framework { kDpsgd, kDpsgld, kDpdfa, kPate };

std::string_view FrameworkName(Framework framework);
Framework ParseFramework(std::string_view name);
std::string_view ArchName(Arch arch);
Arch ParseArch(std::string_view name);

struct DfaConfig {
  double activation_clip = std::numeric_limits<double>::infinity();
  double error_clip = std::numeric_limits<double>::infinity();
  // Target spectral norm of the feedback matrix; 0 keeps the raw draw.
  double feedback_scale = 1.0;
  // Std of the raw feedback entries; 0 means 1/sqrt(classes).
  double feedback_init_std = 0.0;
  // Test hook: set B = W2^T before every step, which turns DFA into backprop.
  bool sync_feedback_to_w2 = false;
};

struct PateConfig {
  int64_t teachers = 1000;
  int64_t queries = 1000;
  // Std of the Gaussian added to each vote count.
  double agg_noise = 40.0;
  int teacher_epochs = 50;
  double teacher_lr = 0.1;
  int64_t teacher_batch = 32;
};

struct TrainerConfig {
  Framework framework = Framework::kDpsgd;
  Arch arch = Arch::kLinear1Layer;
  int64_t hidden_dim = 64;
  ClipSpec clip{0.1};
  NoiseSpec noise{1.0, 0};
  double lr = 0.1;
  // Expected Poisson batch size |B|; the sampling rate is |B| / N.
  int64_t expected_batch = 256;
  int epochs = 10;
  double delta = 1e-5;
  DfaConfig dfa;
  PateConfig pate;
  // Permits sigma == 0; such runs report epsilon = +inf.
  bool test_mode = false;
  int threads = 1;

  // Large-dataset regime: clipping norm raised to 1.
  static TrainerConfig LargeScalePreset();

  // Throws kConfig / kInvalidParameter. n is the private dataset size.
  void Validate(int64_t n) const;
  double SamplingRate(int64_t n) const;
  int64_t StepsPerEpoch(int64_t n) const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  double epsilon = 0.0;
};

struct TrainingTrace {
  std::vector<EpochRecord> records;

  // "epoch,loss,test_acc,epsilon" with one row per record.
  std::string ToCsv() const;
  nlohmann::json ToJson() const;

  // Best test accuracy among epochs whose epsilon is within budget, and that
  // epoch's index in records; nullopt if none qualifies.
  std::optional<size_t> BestEpochWithin(double epsilon_budget) const;
};

// Per-step instrumentation. max_contribution_norm is the largest L2 norm of
// any single sample's clipped contribution to the pre-noise sum.
struct StepInfo {
  int epoch = 0;
  int64_t step = 0;
  int64_t batch_size = 0;
  double max_contribution_norm = 0.0;
  const ModelParams<double>* params = nullptr;
};

struct TrainerHooks {
  std::function<void(const StepInfo&)> on_step;
};

struct TrainResult {
  ModelParams<double> params;
  std::optional<FeedbackMatrix<double>> feedback;
  TrainingTrace trace;
  int64_t steps = 0;
  PrivacyBudget budget;
  // PATE only: labels released for the student's training queries.
  std::vector<int> released_labels;
};

TrainResult TrainDpsgd(const FeatureDataset& train, ModelParams<double> model,
                       const TrainerConfig& config, const FeatureDataset* test = nullptr,
                       const TrainerHooks& hooks = {});

// SGLD with per-sample clipping:
//   w <- w - (lr N / |B|) sum_i clip(g_i, C) + sqrt(lr) xi.
// Accounted as the DPSGD run given by SgldParamMap.
TrainResult TrainDpsgld(const FeatureDataset& train, ModelParams<double> model,
                        const TrainerConfig& config, const FeatureDataset* test = nullptr,
                        const TrainerHooks& hooks = {});

TrainResult TrainDpdfa(const FeatureDataset& train, ModelParams<double> model,
                       const TrainerConfig& config, const FeatureDataset* test = nullptr,
                       const TrainerHooks& hooks = {});

// Teacher i is trained with plain minibatch SGD on shard i of the private set.
std::vector<ModelParams<double>> TrainPateTeachers(const FeatureDataset& private_set,
                                                   const TrainerConfig& config);

// Noisy-argmax label for every query row; the noise for row i comes from its
// own sub-stream.
std::vector<int> PateAggregate(const std::vector<ModelParams<double>>& teachers,
                               const RowMatrix<double>& queries, int classes,
                               const TrainerConfig& config);

TrainResult TrainPate(const FeatureDataset& private_set, const FeatureMatrix& public_unlabeled,
                      const TrainerConfig& config, const FeatureDataset* test = nullptr);

// Initializes a model for config and dispatches on config.framework.
// public_unlabeled is required for PATE only.
TrainResult Train(const FeatureDataset& train, const TrainerConfig& config,
                  const FeatureDataset* test = nullptr,
                  const FeatureMatrix* public_unlabeled = nullptr, const TrainerHooks& hooks = {});

// DPSGD hyper-parameters equivalent to DPSGLD(lr, clip):
//   lr_sgd = lr N, sigma_sgd = |B| / (N sqrt(lr) C), clip_sgd = C.
struct SgdEquivalent {
  double lr = 0.0;
  double sigma = 0.0;
  double clip = 0.0;
};
SgdEquivalent SgldParamMap(double lr, double clip, int64_t batch, int64_t n);

// Random disjoint shards of n / teachers indices each; the remainder is dropped.
std::vector<std::vector<int64_t>> PartitionShards(int64_t n, int64_t teachers, RngStream& stream);

VoteHistogram TeacherVotes(const std::vector<ModelParams<double>>& teachers,
                           const Vector<double>& x, int classes);

double Accuracy(const ModelParams<double>& params, const FeatureDataset& data);
double MeanLoss(const ModelParams<double>& params, const FeatureDataset& data);

}  // namespace privtrain

#endif  // PRIVTRAIN_TRAINERS_HPP_
