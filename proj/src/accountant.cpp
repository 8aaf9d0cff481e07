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

#include "privtrain/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nlohmann/json.hpp"
#include "privtrain/errors.hpp"

namespace privtrain {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckOrders(std::span<const double> alphas) {
  for (size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 1.0) || !std::isfinite(alphas[i])) {
      throw Error(ErrorCode::kInvalidOrder,
                  "Renyi order must be finite and > 1, got " + std::to_string(alphas[i]));
    }
    if (i > 0 && !(alphas[i] > alphas[i - 1])) {
      throw Error(ErrorCode::kInvalidOrder, "Renyi orders must be strictly increasing");
    }
  }
}

// log(exp(a) + exp(b)) without overflow.
double LogAdd(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log(expm1(x)) for x > 0.
double LogExpm1(double x) {
  return x > 30.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x));
}

double LogBinomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// RDP at integer order a of the Poisson-subsampled Gaussian with unit
// sensitivity. Uses A_a - 1 = sum_{k>=2} C(a,k) q^k (1-q)^(a-k) expm1((k^2-k)/(2s^2)),
// whose terms are all positive, so small epsilons keep full relative precision.
double SubsampledGaussianAtOrder(double q, double sigma, int a) {
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  double log_excess = -kInf;
  for (int k = 2; k <= a; ++k) {
    const double exponent = static_cast<double>(k) * (k - 1) * inv_two_var;
    const double term = LogBinomial(a, k) + k * log_q + (a - k) * log_1mq + LogExpm1(exponent);
    log_excess = LogAdd(log_excess, term);
  }
  // log(1 + exp(log_excess))
  const double log_a = log_excess < 0.0 ? std::log1p(std::exp(log_excess))
                                        : log_excess + std::log1p(std::exp(-log_excess));
  return log_a / (a - 1);
}

}  // namespace

void RdpProfile::Validate() const {
  if (alphas.size() != eps_at_alpha.size()) {
    throw Error(ErrorCode::kInvalidParameter, "RDP profile has mismatched lengths");
  }
  CheckOrders(alphas);
  for (double e : eps_at_alpha) {
    if (std::isnan(e) || e < 0.0 || e == -kInf) {
      throw Error(ErrorCode::kInvalidParameter, "RDP epsilon must be >= 0 or +inf");
    }
  }
}

void MechanismEvent::Validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidParameter, "noise sigma must be finite and >= 0");
  }
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw Error(ErrorCode::kInvalidParameter, "sensitivity must be finite and > 0");
  }
  if (!(sampling_rate >= 0.0 && sampling_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidParameter, "sampling rate must lie in [0, 1]");
  }
  if (count < 1) throw Error(ErrorCode::kInvalidParameter, "event count must be >= 1");
}

std::vector<double> DefaultAlphas() {
  std::vector<double> alphas;
  for (int a = 2; a <= 64; ++a) alphas.push_back(a);
  alphas.push_back(128);
  alphas.push_back(256);
  return alphas;
}

RdpProfile RdpGaussian(double sigma, double sensitivity, std::span<const double> alphas) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidParameter, "sigma must be positive");
  }
  // Zero sensitivity is the identical-distributions case.
  if (!(sensitivity >= 0.0) || !std::isfinite(sensitivity)) {
    throw Error(ErrorCode::kInvalidParameter, "sensitivity must be non-negative");
  }
  CheckOrders(alphas);
  RdpProfile profile{{alphas.begin(), alphas.end()}, std::vector<double>(alphas.size())};
  const double scale = sensitivity * sensitivity / (2.0 * sigma * sigma);
  for (size_t i = 0; i < alphas.size(); ++i) profile.eps_at_alpha[i] = alphas[i] * scale;
  return profile;
}

RdpProfile RdpSubsampledGaussian(double q, double sigma, std::span<const double> alphas) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::kInvalidParameter, "sampling rate must lie in [0, 1]");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidParameter, "sigma must be positive");
  }
  CheckOrders(alphas);
  for (double a : alphas) {
    if (a != std::floor(a) || a > std::numeric_limits<int>::max()) {
      throw Error(ErrorCode::kUnsupportedOrder,
                  "subsampled Gaussian needs integer orders, got " + std::to_string(a));
    }
  }
  if (q == 1.0) return RdpGaussian(sigma, 1.0, alphas);
  RdpProfile profile{{alphas.begin(), alphas.end()}, std::vector<double>(alphas.size(), 0.0)};
  if (q == 0.0) return profile;
  for (size_t i = 0; i < alphas.size(); ++i) {
    profile.eps_at_alpha[i] = SubsampledGaussianAtOrder(q, sigma, static_cast<int>(alphas[i]));
  }
  return profile;
}

RdpProfile Compose(std::span<const MechanismEvent> events, std::span<const double> alphas) {
  CheckOrders(alphas);
  RdpProfile total{{alphas.begin(), alphas.end()}, std::vector<double>(alphas.size(), 0.0)};
  for (const MechanismEvent& event : events) {
    event.Validate();
    RdpProfile single;
    if (event.kind == MechanismKind::kSubsampledGaussian && event.sampling_rate == 0.0) {
      continue;
    }
    if (event.sigma == 0.0) {
      // Noiseless test mode: no guarantee at any order.
      single = {total.alphas, std::vector<double>(alphas.size(), kInf)};
    } else if (event.kind == MechanismKind::kSubsampledGaussian) {
      single = RdpSubsampledGaussian(event.sampling_rate, event.sigma / event.sensitivity, alphas);
    } else {
      single = RdpGaussian(event.sigma, event.sensitivity, alphas);
    }
    for (size_t i = 0; i < alphas.size(); ++i) {
      total.eps_at_alpha[i] += static_cast<double>(event.count) * single.eps_at_alpha[i];
    }
  }
  return total;
}

PrivacyBudget ToEpsDelta(const RdpProfile& profile, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::kInvalidParameter, "delta must lie in (0, 1)");
  }
  profile.Validate();
  PrivacyBudget best{kInf, delta, 0.0};
  const double log_inv_delta = -std::log(delta);
  for (size_t i = 0; i < profile.size(); ++i) {
    if (std::isinf(profile.eps_at_alpha[i])) continue;
    const double eps = profile.eps_at_alpha[i] + log_inv_delta / (profile.alphas[i] - 1.0);
    if (eps < best.epsilon) {
      best.epsilon = eps;
      best.argmin_alpha = profile.alphas[i];
    }
  }
  return best;
}

PrivacyBudget AccountTraining(double q, double sigma, int64_t steps, double delta,
                              std::span<const double> alphas) {
  if (steps < 0) throw Error(ErrorCode::kInvalidParameter, "steps must be >= 0");
  std::vector<MechanismEvent> events;
  if (steps > 0) {
    events.push_back({MechanismKind::kSubsampledGaussian, sigma, 1.0, q, steps});
  }
  return ToEpsDelta(Compose(events, alphas), delta);
}

PrivacyBudget AccountTraining(double q, double sigma, int64_t steps, double delta) {
  const std::vector<double> alphas = DefaultAlphas();
  return AccountTraining(q, sigma, steps, delta, alphas);
}

void to_json(nlohmann::json& j, const RdpProfile& profile) {
  nlohmann::json eps = nlohmann::json::array();
  for (double e : profile.eps_at_alpha) {
    if (std::isinf(e)) {
      eps.push_back("inf");
    } else {
      eps.push_back(e);
    }
  }
  j = nlohmann::json{{"alphas", profile.alphas}, {"eps", eps}};
}

void from_json(const nlohmann::json& j, RdpProfile& profile) {
  profile.alphas = j.at("alphas").get<std::vector<double>>();
  profile.eps_at_alpha.clear();
  for (const auto& e : j.at("eps")) {
    profile.eps_at_alpha.push_back(e.is_string() && e.get<std::string>() == "inf" ? kInf
                                                                                  : e.get<double>());
  }
  profile.Validate();
}

void to_json(nlohmann::json& j, const PrivacyBudget& budget) {
  j = nlohmann::json{{"delta", budget.delta}, {"argmin_alpha", budget.argmin_alpha}};
  if (std::isinf(budget.epsilon)) {
    j["epsilon"] = "inf";
  } else {
    j["epsilon"] = budget.epsilon;
  }
}

void from_json(const nlohmann::json& j, PrivacyBudget& budget) {
  const auto& e = j.at("epsilon");
  budget.epsilon = e.is_string() ? kInf : e.get<double>();
  budget.delta = j.at("delta").get<double>();
  budget.argmin_alpha = j.value("argmin_alpha", 0.0);
}

}  // namespace privtrain
