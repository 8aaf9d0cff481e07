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

#ifndef PRIVTRAIN_MODELS_HPP_
#define PRIVTRAIN_MODELS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "privtrain/errors.hpp"
#include "privtrain/mechanisms.hpp"
#include "privtrain/rng.hpp"

namespace privtrain {

enum class Arch { kLinear1Layer = 0, kMlp2Layer = 1 };
enum class Loss { kSoftmaxCe, kSigmoidBce };

// The loss each architecture trains with: softmax cross-entropy for the
// linear readout, one-vs-all sigmoid BCE for the MLP's sigmoid output layer.
inline Loss DefaultLoss(Arch arch) {
  return arch == Arch::kLinear1Layer ? Loss::kSoftmaxCe : Loss::kSigmoidBce;
}

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Weights of a 1-layer linear classifier (w1: classes x D) or a 2-layer
// tanh/sigmoid MLP (w1: hidden x D, w2: classes x hidden). The flat parameter
// ordering is (w1 row-major, b1, w2 row-major, b2) and is stable.
template <typename Scalar>
struct ModelParams {
  Arch arch = Arch::kLinear1Layer;
  RowMatrix<Scalar> w1;
  Vector<Scalar> b1;
  RowMatrix<Scalar> w2;
  Vector<Scalar> b2;

  static ModelParams Zeros(Arch arch, Eigen::Index input_dim, Eigen::Index hidden_dim,
                           Eigen::Index classes) {
    if (input_dim < 1 || classes < 1 || (arch == Arch::kMlp2Layer && hidden_dim < 1)) {
      throw Error(ErrorCode::kInvalidParameter, "model dimensions must be positive");
    }
    ModelParams p;
    p.arch = arch;
    if (arch == Arch::kLinear1Layer) {
      p.w1 = RowMatrix<Scalar>::Zero(classes, input_dim);
      p.b1 = Vector<Scalar>::Zero(classes);
    } else {
      p.w1 = RowMatrix<Scalar>::Zero(hidden_dim, input_dim);
      p.b1 = Vector<Scalar>::Zero(hidden_dim);
      p.w2 = RowMatrix<Scalar>::Zero(classes, hidden_dim);
      p.b2 = Vector<Scalar>::Zero(classes);
    }
    return p;
  }

  Eigen::Index input_dim() const { return w1.cols(); }
  Eigen::Index hidden_dim() const { return arch == Arch::kMlp2Layer ? w1.rows() : 0; }
  Eigen::Index num_classes() const { return arch == Arch::kMlp2Layer ? w2.rows() : w1.rows(); }

  Eigen::Index ParameterCount() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  Vector<Scalar> Flatten() const {
    Vector<Scalar> flat(ParameterCount());
    Eigen::Index at = 0;
    flat.segment(at, w1.size()) = w1.template reshaped<Eigen::RowMajor>();
    at += w1.size();
    flat.segment(at, b1.size()) = b1;
    at += b1.size();
    flat.segment(at, w2.size()) = w2.template reshaped<Eigen::RowMajor>();
    at += w2.size();
    flat.segment(at, b2.size()) = b2;
    return flat;
  }

  template <typename Derived>
  void Unflatten(const Eigen::MatrixBase<Derived>& flat) {
    if (flat.size() != ParameterCount()) {
      throw Error(ErrorCode::kDimensionMismatch, "flat parameter vector has wrong length");
    }
    Eigen::Index at = 0;
    w1.template reshaped<Eigen::RowMajor>() = flat.segment(at, w1.size());
    at += w1.size();
    b1 = flat.segment(at, b1.size());
    at += b1.size();
    w2.template reshaped<Eigen::RowMajor>() = flat.segment(at, w2.size());
    at += w2.size();
    b2 = flat.segment(at, b2.size());
  }

  bool AllFinite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
  }

  template <typename Other>
  ModelParams<Other> Cast() const {
    ModelParams<Other> out;
    out.arch = arch;
    out.w1 = w1.template cast<Other>();
    out.b1 = b1.template cast<Other>();
    out.w2 = w2.template cast<Other>();
    out.b2 = b2.template cast<Other>();
    return out;
  }

  bool operator==(const ModelParams& other) const {
    return arch == other.arch && w1 == other.w1 && b1 == other.b1 && w2 == other.w2 &&
           b2 == other.b2;
  }
};

// Fixed random feedback matrix for direct feedback alignment (hidden x classes).
template <typename Scalar>
struct FeedbackMatrix {
  RowMatrix<Scalar> b;
};

// Uniform(-s, s) weights with s = 1/sqrt(fan_in); zero biases.
template <typename Scalar>
ModelParams<Scalar> InitParams(Arch arch, Eigen::Index input_dim, Eigen::Index hidden_dim,
                               Eigen::Index classes, RngStream& stream) {
  auto p = ModelParams<Scalar>::Zeros(arch, input_dim, hidden_dim, classes);
  auto fill = [&stream](RowMatrix<Scalar>& w) {
    const double s = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      w.data()[i] = static_cast<Scalar>(stream.Uniform(-s, s));
    }
  };
  fill(p.w1);
  if (arch == Arch::kMlp2Layer) fill(p.w2);
  return p;
}

// Entries Normal(0, scale^2).
template <typename Scalar>
FeedbackMatrix<Scalar> MakeFeedback(Eigen::Index hidden_dim, Eigen::Index classes, double scale,
                                    RngStream& stream) {
  FeedbackMatrix<Scalar> fb{RowMatrix<Scalar>(hidden_dim, classes)};
  for (Eigen::Index i = 0; i < fb.b.size(); ++i) {
    fb.b.data()[i] = static_cast<Scalar>(scale * stream.Normal());
  }
  return fb;
}

template <typename Scalar>
Scalar SpectralNorm(const RowMatrix<Scalar>& m) {
  if (m.size() == 0) return Scalar(0);
  Eigen::JacobiSVD<RowMatrix<Scalar>> svd(m);
  return svd.singularValues()(0);
}

// Rescales so that ||B||_2 == target.
template <typename Scalar>
void ScaleToSpectralNorm(FeedbackMatrix<Scalar>& fb, double target) {
  const Scalar norm = SpectralNorm(fb.b);
  if (norm > Scalar(0)) fb.b *= static_cast<Scalar>(target) / norm;
}

namespace internal {

template <typename Scalar>
void CheckInput(const ModelParams<Scalar>& params, Eigen::Index size) {
  if (size != params.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature dimension " + std::to_string(size) +
                                                   " != model input " +
                                                   std::to_string(params.input_dim()));
  }
}

template <typename Scalar>
void CheckLabel(const ModelParams<Scalar>& params, int label) {
  if (label < 0 || label >= params.num_classes()) {
    throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(label) + " out of range");
  }
}

template <typename Scalar>
Scalar Sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
Scalar Softplus(Scalar z) {
  return std::max(z, Scalar(0)) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace internal

template <typename Derived>
Vector<typename Derived::Scalar> Softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

template <typename Derived>
Vector<typename Derived::Scalar> Sigmoid(const Eigen::MatrixBase<Derived>& z) {
  return z.unaryExpr([](auto v) { return internal::Sigmoid(v); });
}

// Intermediate values of one forward pass. For the linear model only
// `logits` is populated.
template <typename Scalar>
struct ForwardPass {
  Vector<Scalar> pre_hidden;
  Vector<Scalar> hidden;
  Vector<Scalar> logits;
};

template <typename Scalar, typename Derived>
ForwardPass<Scalar> Forward(const ModelParams<Scalar>& params,
                            const Eigen::MatrixBase<Derived>& x) {
  internal::CheckInput(params, x.size());
  ForwardPass<Scalar> pass;
  if (params.arch == Arch::kLinear1Layer) {
    pass.logits = params.w1 * x + params.b1;
  } else {
    pass.pre_hidden = params.w1 * x + params.b1;
    pass.hidden = pass.pre_hidden.array().tanh();
    pass.logits = params.w2 * pass.hidden + params.b2;
  }
  return pass;
}

// softmax(W1 x + b1) for the linear classifier.
template <typename Scalar, typename Derived>
Vector<Scalar> LinearForward(const ModelParams<Scalar>& params,
                             const Eigen::MatrixBase<Derived>& x) {
  if (params.arch != Arch::kLinear1Layer) {
    throw Error(ErrorCode::kConfig, "LinearForward requires a linear_1layer model");
  }
  return Softmax(Forward(params, x).logits);
}

template <typename Scalar, typename Derived>
Vector<Scalar> Probabilities(const ModelParams<Scalar>& params,
                             const Eigen::MatrixBase<Derived>& x, Loss loss) {
  const auto logits = Forward(params, x).logits;
  return loss == Loss::kSoftmaxCe ? Softmax(logits) : Sigmoid(logits);
}

// Predicted class: argmax of the output logits, which is also the argmax of
// the softmax or sigmoid outputs. Ties go to the lowest index.
template <typename Scalar, typename Derived>
int Predict(const ModelParams<Scalar>& params, const Eigen::MatrixBase<Derived>& x) {
  const auto logits = Forward(params, x).logits;
  Eigen::Index best = 0;
  logits.maxCoeff(&best);
  return static_cast<int>(best);
}

template <typename Scalar, typename Derived>
Scalar LossFromLogits(const Eigen::MatrixBase<Derived>& logits, int label, Loss loss) {
  if (loss == Loss::kSoftmaxCe) {
    const Scalar m = logits.maxCoeff();
    return m + std::log((logits.array() - m).exp().sum()) - logits(label);
  }
  Scalar total = 0;
  for (Eigen::Index c = 0; c < logits.size(); ++c) {
    total += internal::Softplus(logits(c)) - (c == label ? logits(c) : Scalar(0));
  }
  return total;
}

template <typename Scalar, typename Derived>
Scalar SampleLoss(const ModelParams<Scalar>& params, const Eigen::MatrixBase<Derived>& x,
                  int label, Loss loss) {
  internal::CheckLabel(params, label);
  return LossFromLogits<Scalar>(Forward(params, x).logits, label, loss);
}

// dLoss/dlogits: p - onehot(y) for both losses, with p the softmax or
// per-class sigmoid output.
template <typename Scalar, typename Derived>
Vector<Scalar> OutputError(const Eigen::MatrixBase<Derived>& logits, int label, Loss loss) {
  Vector<Scalar> e = loss == Loss::kSoftmaxCe ? Softmax(logits) : Sigmoid(logits);
  e(label) -= Scalar(1);
  return e;
}

namespace internal {

// Writes the flat gradient given the output error and the error arriving at
// the hidden pre-activation.
template <typename Scalar, typename Derived>
Vector<Scalar> AssembleMlpGrad(const ModelParams<Scalar>& params,
                               const Eigen::MatrixBase<Derived>& x, const Vector<Scalar>& hidden,
                               const Vector<Scalar>& out_error,
                               const Vector<Scalar>& hidden_delta) {
  Vector<Scalar> g(params.ParameterCount());
  Eigen::Index at = 0;
  const Eigen::Index h = params.w1.rows();
  const Eigen::Index d = params.w1.cols();
  const Eigen::Index k = params.w2.rows();
  Eigen::Map<RowMatrix<Scalar>>(g.data() + at, h, d).noalias() = hidden_delta * x.transpose();
  at += h * d;
  g.segment(at, h) = hidden_delta;
  at += h;
  Eigen::Map<RowMatrix<Scalar>>(g.data() + at, k, h).noalias() = out_error * hidden.transpose();
  at += k * h;
  g.segment(at, k) = out_error;
  return g;
}

}  // namespace internal

// Exact per-sample gradient of the loss, flattened in parameter order.
template <typename Scalar, typename Derived>
Vector<Scalar> PerSampleGrad(const ModelParams<Scalar>& params,
                             const Eigen::MatrixBase<Derived>& x, int label, Loss loss) {
  internal::CheckLabel(params, label);
  const ForwardPass<Scalar> pass = Forward(params, x);
  const Vector<Scalar> e = OutputError<Scalar>(pass.logits, label, loss);
  if (params.arch == Arch::kLinear1Layer) {
    Vector<Scalar> g(params.ParameterCount());
    const Eigen::Index k = params.w1.rows();
    const Eigen::Index d = params.w1.cols();
    Eigen::Map<RowMatrix<Scalar>>(g.data(), k, d).noalias() = e * x.transpose();
    g.segment(k * d, k) = e;
    return g;
  }
  const Vector<Scalar> tanh_prime = Scalar(1) - pass.hidden.array().square();
  const Vector<Scalar> delta = (params.w2.transpose() * e).cwiseProduct(tanh_prime);
  return internal::AssembleMlpGrad(params, x, pass.hidden, e, delta);
}

struct DfaClip {
  double activation = std::numeric_limits<double>::infinity();
  double error = std::numeric_limits<double>::infinity();
};

// L2-clips hidden activations and the output error independently.
template <typename Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> ClipActivationsAndError(const Vector<Scalar>& hidden,
                                                                  const Vector<Scalar>& error,
                                                                  const DfaClip& thresholds) {
  std::pair<Vector<Scalar>, Vector<Scalar>> out{hidden, error};
  if (std::isfinite(thresholds.activation)) {
    ClipL2InPlace(out.first, ClipSpec{thresholds.activation});
  } else if (!(thresholds.activation > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "activation clip must be > 0");
  }
  if (std::isfinite(thresholds.error)) {
    ClipL2InPlace(out.second, ClipSpec{thresholds.error});
  } else if (!(thresholds.error > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "error clip must be > 0");
  }
  return out;
}

// DFA update direction for the 2-layer MLP. The output block is the BCE
// gradient e * h^T; the hidden block replaces W2^T e with B e. Activations
// and error are clipped first (no-op with the default infinite thresholds).
template <typename Scalar, typename Derived>
Vector<Scalar> DfaDirections(const ModelParams<Scalar>& params,
                             const FeedbackMatrix<Scalar>& feedback,
                             const Eigen::MatrixBase<Derived>& x, int label,
                             const DfaClip& clip = {}, Loss loss = Loss::kSigmoidBce) {
  if (params.arch != Arch::kMlp2Layer) {
    throw Error(ErrorCode::kConfig, "DFA requires a mlp_2layer model");
  }
  if (feedback.b.rows() != params.hidden_dim() || feedback.b.cols() != params.num_classes()) {
    throw Error(ErrorCode::kDimensionMismatch, "feedback matrix must be hidden x classes");
  }
  internal::CheckLabel(params, label);
  const ForwardPass<Scalar> pass = Forward(params, x);
  const Vector<Scalar> tanh_prime = Scalar(1) - pass.hidden.array().square();
  auto [hidden, e] =
      ClipActivationsAndError<Scalar>(pass.hidden, OutputError<Scalar>(pass.logits, label, loss),
                                      clip);
  const Vector<Scalar> delta = (feedback.b * e).cwiseProduct(tanh_prime);
  return internal::AssembleMlpGrad(params, x, hidden, e, delta);
}

}  // namespace privtrain

#endif  // PRIVTRAIN_MODELS_HPP_
