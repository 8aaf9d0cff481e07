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

#ifndef PRIVTRAIN_ACCOUNTANT_HPP_
#define PRIVTRAIN_ACCOUNTANT_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "nlohmann/json_fwd.hpp"

namespace privtrain {

// An RDP curve: eps_at_alpha[i] is the Renyi-DP epsilon at order alphas[i].
// +infinity marks "no guarantee at this order" and is skipped on conversion.
struct RdpProfile {
  std::vector<double> alphas;
  std::vector<double> eps_at_alpha;

  // Throws kInvalidOrder / kInvalidParameter when the invariants fail.
  void Validate() const;
  size_t size() const { return alphas.size(); }
};

struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  double argmin_alpha = 0.0;
};

enum class MechanismKind { kGaussian, kSubsampledGaussian, kGaussianNoisyMax };

// sigma is the absolute noise std and sensitivity the L2 sensitivity of the
// released quantity; sigma / sensitivity is the noise multiplier. DP-SGD style
// events use sensitivity 1 so that sigma is the multiplier directly.
struct MechanismEvent {
  MechanismKind kind = MechanismKind::kGaussian;
  double sigma = 1.0;
  double sensitivity = 1.0;
  double sampling_rate = 1.0;
  int64_t count = 1;

  void Validate() const;
};

// Integers 2..64 plus 128 and 256.
std::vector<double> DefaultAlphas();

RdpProfile RdpGaussian(double sigma, double sensitivity, std::span<const double> alphas);

// RDP of one Poisson-subsampled Gaussian step with unit sensitivity and noise
// multiplier sigma. Orders must be integers >= 2.
RdpProfile RdpSubsampledGaussian(double q, double sigma, std::span<const double> alphas);

// Sums count * eps_event(alpha) over events.
RdpProfile Compose(std::span<const MechanismEvent> events, std::span<const double> alphas);

// eps = min_alpha eps(alpha) + log(1/delta) / (alpha - 1).
PrivacyBudget ToEpsDelta(const RdpProfile& profile, double delta);

// steps subsampled-Gaussian events on the default grid, then ToEpsDelta.
PrivacyBudget AccountTraining(double q, double sigma, int64_t steps, double delta);
PrivacyBudget AccountTraining(double q, double sigma, int64_t steps, double delta,
                              std::span<const double> alphas);

void to_json(nlohmann::json& j, const RdpProfile& profile);
void from_json(const nlohmann::json& j, RdpProfile& profile);
void to_json(nlohmann::json& j, const PrivacyBudget& budget);
void from_json(const nlohmann::json& j, PrivacyBudget& budget);

}  // namespace privtrain

#endif  // PRIVTRAIN_ACCOUNTANT_HPP_
