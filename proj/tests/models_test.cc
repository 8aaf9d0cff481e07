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

#include "privtrain/models.hpp"

#include <cmath>
#include <cstring>

#include "gtest/gtest.h"

namespace privtrain {
namespace {

ModelParams<double> RandomModel(Arch arch, int d, int h, int k, double scale, RngStream& rng) {
  auto p = ModelParams<double>::Zeros(arch, d, h, k);
  Vector<double> flat(p.ParameterCount());
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = scale * rng.Normal();
  p.Unflatten(flat);
  return p;
}

Vector<double> RandomVector(int d, double scale, RngStream& rng) {
  Vector<double> x(d);
  for (int i = 0; i < d; ++i) x(i) = scale * rng.Normal();
  return x;
}

// Central differences of the per-sample loss, one parameter at a time.
Vector<double> FiniteDifferenceGrad(const ModelParams<double>& params, const Vector<double>& x,
                                    int label, Loss loss, double step) {
  const Vector<double> base = params.Flatten();
  Vector<double> g(base.size());
  ModelParams<double> probe = params;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    Vector<double> plus = base, minus = base;
    plus(i) += step;
    minus(i) -= step;
    probe.Unflatten(plus);
    const double lp = SampleLoss(probe, x, label, loss);
    probe.Unflatten(minus);
    const double lm = SampleLoss(probe, x, label, loss);
    g(i) = (lp - lm) / (2 * step);
  }
  return g;
}

TEST(LinearForward, UniformAtZeroWeights) {
  const auto p = ModelParams<double>::Zeros(Arch::kLinear1Layer, 4, 0, 10);
  const Vector<double> probs = LinearForward(p, Vector<double>::Ones(4));
  for (int c = 0; c < 10; ++c) EXPECT_DOUBLE_EQ(probs(c), 0.1);
}

TEST(LinearForward, NormalizedAndShiftInvariant) {
  RngStream rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = RandomModel(Arch::kLinear1Layer, 6, 0, 7, 2.0, rng);
    const Vector<double> x = RandomVector(6, 3.0, rng);
    const Vector<double> probs = LinearForward(p, x);
    EXPECT_NEAR(probs.sum(), 1.0, 1e-12);
    p.b1.array() += 123.0;
    EXPECT_TRUE(LinearForward(p, x).isApprox(probs, 1e-12));
  }
}

TEST(LinearForward, RejectsWrongArchAndDimension) {
  const auto mlp = ModelParams<double>::Zeros(Arch::kMlp2Layer, 4, 3, 2);
  EXPECT_THROW(LinearForward(mlp, Vector<double>::Ones(4)), Error);
  const auto lin = ModelParams<double>::Zeros(Arch::kLinear1Layer, 4, 0, 2);
  try {
    LinearForward(lin, Vector<double>::Ones(5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(ModelParams, FlatteningOrder) {
  auto p = ModelParams<double>::Zeros(Arch::kMlp2Layer, 3, 2, 2);
  p.w1 << 1, 2, 3, 4, 5, 6;
  p.b1 << 7, 8;
  p.w2 << 9, 10, 11, 12;
  p.b2 << 13, 14;
  const Vector<double> flat = p.Flatten();
  ASSERT_EQ(flat.size(), 14);
  for (int i = 0; i < 14; ++i) EXPECT_EQ(flat(i), i + 1);
  ModelParams<double> q = ModelParams<double>::Zeros(Arch::kMlp2Layer, 3, 2, 2);
  q.Unflatten(flat);
  EXPECT_EQ(q, p);
}

TEST(PerSampleGrad, PerfectPredictionGivesZero) {
  auto p = ModelParams<double>::Zeros(Arch::kLinear1Layer, 3, 0, 4);
  p.b1(2) = 1000.0;
  const Vector<double> g = PerSampleGrad(p, Vector<double>::Ones(3), 2, Loss::kSoftmaxCe);
  EXPECT_EQ(g.norm(), 0.0);
}

TEST(PerSampleGrad, ZeroInputOnlyMovesBias) {
  RngStream rng(4);
  const auto p = RandomModel(Arch::kLinear1Layer, 5, 0, 3, 1.0, rng);
  const Vector<double> x = Vector<double>::Zero(5);
  const Vector<double> g = PerSampleGrad(p, x, 1, Loss::kSoftmaxCe);
  EXPECT_EQ(g.head(15).norm(), 0.0);
  Vector<double> expected = LinearForward(p, x);
  expected(1) -= 1.0;
  EXPECT_TRUE(g.tail(3).isApprox(expected));
}

TEST(PerSampleGrad, LinearOuterProductForm) {
  RngStream rng(8);
  const auto p = RandomModel(Arch::kLinear1Layer, 4, 0, 3, 1.0, rng);
  const Vector<double> x = RandomVector(4, 1.0, rng);
  Vector<double> e = LinearForward(p, x);
  e(0) -= 1.0;
  const RowMatrix<double> outer = e * x.transpose();
  const Vector<double> g = PerSampleGrad(p, x, 0, Loss::kSoftmaxCe);
  for (int i = 0; i < 12; ++i) EXPECT_DOUBLE_EQ(g(i), outer.data()[i]);
}

TEST(PerSampleGrad, MatchesFiniteDifferences) {
  RngStream rng(2024);
  for (Arch arch : {Arch::kLinear1Layer, Arch::kMlp2Layer}) {
    for (Loss loss : {Loss::kSoftmaxCe, Loss::kSigmoidBce}) {
      for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + static_cast<int>(rng.UniformInt(6));
        const int h = 2 + static_cast<int>(rng.UniformInt(6));
        const int k = 2 + static_cast<int>(rng.UniformInt(4));
        const auto p = RandomModel(arch, d, h, k, 0.7, rng);
        const Vector<double> x = RandomVector(d, 1.0, rng);
        const int y = static_cast<int>(rng.UniformInt(k));
        const Vector<double> analytic = PerSampleGrad(p, x, y, loss);
        const Vector<double> numeric = FiniteDifferenceGrad(p, x, y, loss, 1e-5);
        const double rel = (analytic - numeric).norm() / std::max(analytic.norm(), 1e-8);
        EXPECT_LT(rel, 1e-4) << "arch " << static_cast<int>(arch) << " trial " << trial;
      }
    }
  }
}

TEST(PerSampleGrad, RejectsBadLabel) {
  const auto p = ModelParams<double>::Zeros(Arch::kLinear1Layer, 2, 0, 3);
  try {
    PerSampleGrad(p, Vector<double>::Ones(2), 3, Loss::kSoftmaxCe);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLabelOutOfRange);
  }
  EXPECT_THROW(PerSampleGrad(p, Vector<double>::Ones(2), -1, Loss::kSoftmaxCe), Error);
}

TEST(Models, ForwardDeterministicAndSaturationSafe) {
  RngStream rng(6);
  const auto p = RandomModel(Arch::kMlp2Layer, 8, 16, 4, 1.0, rng);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector<double> x = RandomVector(8, 1e3, rng).cwiseMax(-1e3).cwiseMin(1e3);
    const auto a = Forward(p, x);
    const auto b = Forward(p, x);
    EXPECT_EQ(a.logits, b.logits);
    EXPECT_TRUE(a.logits.allFinite());
    for (Loss loss : {Loss::kSoftmaxCe, Loss::kSigmoidBce}) {
      EXPECT_TRUE(PerSampleGrad(p, x, 1, loss).allFinite());
      EXPECT_TRUE(std::isfinite(SampleLoss(p, x, 1, loss)));
    }
    FeedbackMatrix<double> fb{p.w2.transpose()};
    EXPECT_TRUE(DfaDirections(p, fb, x, 0).allFinite());
  }
}

TEST(DfaDirections, OutputBlockIsBackprop) {
  RngStream rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = RandomModel(Arch::kMlp2Layer, 5, 7, 3, 0.5, rng);
    const auto fb = MakeFeedback<double>(7, 3, 1.0, rng);
    const Vector<double> x = RandomVector(5, 1.0, rng);
    const Vector<double> dfa = DfaDirections(p, fb, x, 1);
    const Vector<double> bp = PerSampleGrad(p, x, 1, Loss::kSigmoidBce);
    const Eigen::Index hidden_block = 7 * 5 + 7;
    const Eigen::Index out_block = bp.size() - hidden_block;
    EXPECT_EQ(std::memcmp(dfa.data() + hidden_block, bp.data() + hidden_block,
                          sizeof(double) * out_block),
              0);
  }
}

TEST(DfaDirections, TransposedOutputWeightsGiveBackprop) {
  RngStream rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = RandomModel(Arch::kMlp2Layer, 6, 4, 3, 0.8, rng);
    const FeedbackMatrix<double> fb{p.w2.transpose()};
    const Vector<double> x = RandomVector(6, 1.0, rng);
    EXPECT_TRUE(DfaDirections(p, fb, x, 2).isApprox(PerSampleGrad(p, x, 2, Loss::kSigmoidBce), 1e-14));
  }
}

TEST(DfaDirections, AlignsWithBackpropAfterWarmup) {
  // Weights start at scale 0.05; a short DFA warm-up aligns W2 with B^T, after
  // which the hidden-layer DFA direction points along the backprop gradient.
  const int d = 10, h = 32, k = 5, trials = 1000;
  int positive = 0;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(1000 + t);
    auto p = ModelParams<double>::Zeros(Arch::kMlp2Layer, d, h, k);
    for (Eigen::Index i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = rng.Uniform(-0.05, 0.05);
    for (Eigen::Index i = 0; i < p.w2.size(); ++i) p.w2.data()[i] = rng.Uniform(-0.05, 0.05);
    const auto fb = MakeFeedback<double>(h, k, 1.0 / std::sqrt(double(k)), rng);
    RowMatrix<double> teacher(k, d);
    for (Eigen::Index i = 0; i < teacher.size(); ++i) teacher.data()[i] = rng.Normal();
    auto label_of = [&](const Vector<double>& x) {
      Eigen::Index y;
      (teacher * x).maxCoeff(&y);
      return static_cast<int>(y);
    };
    for (int s = 0; s < 50; ++s) {
      const Vector<double> x = RandomVector(d, 1.0, rng);
      p.Unflatten(p.Flatten() - 0.05 * DfaDirections(p, fb, x, label_of(x)));
    }
    const Vector<double> x = RandomVector(d, 1.0, rng);
    const Eigen::Index hidden_block = h * d + h;
    const Vector<double> bp = PerSampleGrad(p, x, label_of(x), Loss::kSigmoidBce);
    const Vector<double> dfa = DfaDirections(p, fb, x, label_of(x));
    positive += bp.head(hidden_block).dot(dfa.head(hidden_block)) > 0;
  }
  EXPECT_GE(positive, 900);
}

TEST(DfaDirections, RejectsLinearModelAndBadFeedback) {
  const auto lin = ModelParams<double>::Zeros(Arch::kLinear1Layer, 3, 0, 2);
  FeedbackMatrix<double> fb{RowMatrix<double>::Zero(4, 2)};
  EXPECT_THROW(DfaDirections(lin, fb, Vector<double>::Ones(3), 0), Error);
  const auto mlp = ModelParams<double>::Zeros(Arch::kMlp2Layer, 3, 5, 2);
  EXPECT_THROW(DfaDirections(mlp, fb, Vector<double>::Ones(3), 0), Error);
}

TEST(ClipActivationsAndError, Examples) {
  Vector<double> h(2), e(3);
  h << 0.3, 0.4;
  e << 2.0, 2.0, 1.0;
  const auto [ch, ce] = ClipActivationsAndError<double>(h, e, {1.0, 1.0});
  EXPECT_EQ(ch, h);
  EXPECT_TRUE(ce.isApprox(e / 3.0));
  EXPECT_THROW((ClipActivationsAndError<double>(h, e, {0.0, 1.0})), Error);
}

TEST(ClipActivationsAndError, ClippedDfaUpdateNormBounds) {
  // Hidden block: ||(B e) . tanh'(z) x^T|| <= ||B||_2 C_err max|tanh'| ||x||.
  // Output block: ||e h^T|| <= C_err C_act.
  RngStream rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 3 + static_cast<int>(rng.UniformInt(8));
    const int hd = 2 + static_cast<int>(rng.UniformInt(10));
    const int k = 2 + static_cast<int>(rng.UniformInt(5));
    const auto p = RandomModel(Arch::kMlp2Layer, d, hd, k, 1.0, rng);
    auto fb = MakeFeedback<double>(hd, k, 1.0, rng);
    ScaleToSpectralNorm(fb, rng.Uniform(0.1, 3.0));
    const DfaClip clip{rng.Uniform(0.01, 2.0), rng.Uniform(0.01, 2.0)};
    const Vector<double> x = RandomVector(d, 2.0, rng);
    const Vector<double> g = DfaDirections(p, fb, x, static_cast<int>(rng.UniformInt(k)), clip);
    const Eigen::Index hidden_block = hd * d + hd;
    const double hidden_w = g.head(hd * d).norm();
    const double bound = SpectralNorm(fb.b) * clip.error * 1.0 * x.norm();
    EXPECT_LE(hidden_w, bound * (1 + 1e-12));
    EXPECT_LE(g.segment(hd * d, hd).norm(), SpectralNorm(fb.b) * clip.error * (1 + 1e-12));
    EXPECT_LE(g.segment(hidden_block, k * hd).norm(), clip.error * clip.activation * (1 + 1e-12));
  }
}

TEST(Feedback, SpectralScaling) {
  RngStream rng(13);
  auto fb = MakeFeedback<double>(20, 5, 0.3, rng);
  ScaleToSpectralNorm(fb, 2.5);
  EXPECT_NEAR(SpectralNorm(fb.b), 2.5, 1e-12);
}

TEST(InitParams, UniformFanInScale) {
  RngStream rng(14);
  const auto p = InitParams<double>(Arch::kMlp2Layer, 100, 25, 10, rng);
  EXPECT_LE(p.w1.cwiseAbs().maxCoeff(), 0.1);
  EXPECT_GT(p.w1.cwiseAbs().maxCoeff(), 0.09);
  EXPECT_LE(p.w2.cwiseAbs().maxCoeff(), 0.2);
  EXPECT_EQ(p.b1.norm(), 0.0);
}

}  // namespace
}  // namespace privtrain
