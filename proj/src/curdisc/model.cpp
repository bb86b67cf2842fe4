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

#include "curdisc/model.hpp"

#include <algorithm>
#include <cmath>

#include "curdisc/error.hpp"
#include "curdisc/rng.hpp"

namespace curdisc {
namespace {

std::size_t Sz(int v) { return static_cast<std::size_t>(v); }

// Softmax in place over `z`; returns log-sum-exp.
double SoftmaxInPlace(std::span<double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return zmax + std::log(sum);
}

void CheckInput(const ModelSpec& spec, std::span<const double> x, int label) {
  if (x.size() != Sz(spec.input_dim)) {
    Fail(ErrorCode::kInvalidArgument,
         "feature dimension " + std::to_string(x.size()) + " does not match model input " +
             std::to_string(spec.input_dim));
  }
  for (double v : x) {
    if (!std::isfinite(v)) Fail(ErrorCode::kInvalidArgument, "non-finite feature value");
  }
  if (label < 0 || label >= spec.num_classes) {
    Fail(ErrorCode::kInvalidArgument, "label out of range");
  }
}

// Writes logits for `x` into `z` and (mlp) hidden activations into `h`.
void Logits(const ModelSpec& spec, std::span<const double> params,
            std::span<const double> x, std::span<double> z, std::span<double> h) {
  const std::size_t d = Sz(spec.input_dim);
  const std::size_t C = Sz(spec.num_classes);
  if (spec.kind == ModelKind::kLinear) {
    const double* W = params.data();
    const double* b = W + C * d;
    for (std::size_t c = 0; c < C; ++c) {
      double acc = b[c];
      const double* row = W + c * d;
      for (std::size_t j = 0; j < d; ++j) acc += row[j] * x[j];
      z[c] = acc;
    }
    return;
  }
  const std::size_t H = Sz(spec.hidden);
  const double* W1 = params.data();
  const double* b1 = W1 + H * d;
  const double* W2 = b1 + H;
  const double* b2 = W2 + C * H;
  for (std::size_t u = 0; u < H; ++u) {
    double acc = b1[u];
    const double* row = W1 + u * d;
    for (std::size_t j = 0; j < d; ++j) acc += row[j] * x[j];
    h[u] = std::tanh(acc);
  }
  for (std::size_t c = 0; c < C; ++c) {
    double acc = b2[c];
    const double* row = W2 + c * H;
    for (std::size_t u = 0; u < H; ++u) acc += row[u] * h[u];
    z[c] = acc;
  }
}

}  // namespace

std::size_t ModelSpec::NumParams() const {
  const std::size_t d = Sz(input_dim);
  const std::size_t C = Sz(num_classes);
  if (kind == ModelKind::kLinear) return C * d + C;
  const std::size_t H = Sz(hidden);
  return H * d + H + C * H + C;
}

std::string ModelSpec::Name() const {
  return kind == ModelKind::kLinear ? "linear" : "mlp" + std::to_string(hidden);
}

ModelSpec ParseModel(const std::string& name) {
  ModelSpec spec;
  if (name == "linear") return spec;
  if (name.rfind("mlp", 0) == 0) {
    spec.kind = ModelKind::kMlp;
    const std::string digits = name.substr(3);
    spec.hidden = 16;
    if (!digits.empty()) {
      Require(digits.find_first_not_of("0123456789") == std::string::npos,
              "bad model name '" + name + "'");
      spec.hidden = std::stoi(digits);
    }
    Require(spec.hidden >= 1, "mlp needs at least one hidden unit");
    return spec;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown model '" + name + "'");
}

std::vector<double> InitParams(const ModelSpec& spec, std::uint64_t seed, double scale) {
  Require(spec.input_dim >= 1 && spec.num_classes >= 2, "model dimensions unset");
  std::vector<double> params(spec.NumParams(), 0.0);
  Rng rng(DeriveSeed(seed, 0x1417));
  const std::size_t d = Sz(spec.input_dim);
  const std::size_t C = Sz(spec.num_classes);
  auto fill = [&](std::size_t begin, std::size_t count) {
    for (std::size_t i = begin; i < begin + count; ++i) params[i] = rng.Uniform(-scale, scale);
  };
  if (spec.kind == ModelKind::kLinear) {
    fill(0, C * d);
  } else {
    const std::size_t H = Sz(spec.hidden);
    fill(0, H * d);
    fill(H * d + H, C * H);
  }
  return params;
}

LossAndProbs ForwardLoss(const ModelSpec& spec, std::span<const double> params,
                         std::span<const double> x, int label) {
  CheckInput(spec, x, label);
  LossAndProbs out;
  out.probs.resize(Sz(spec.num_classes));
  std::vector<double> h(Sz(spec.hidden));
  Logits(spec, params, x, out.probs, h);
  const double zy = out.probs[Sz(label)];
  const double lse = SoftmaxInPlace(out.probs);
  out.loss = std::max(0.0, lse - zy);
  return out;
}

int Predict(const ModelSpec& spec, std::span<const double> params,
            std::span<const double> x) {
  std::vector<double> z(Sz(spec.num_classes));
  std::vector<double> h(Sz(spec.hidden));
  Logits(spec, params, x, z, h);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

std::span<const double> BatchPass::Forward(std::span<const double> params,
                                           std::span<const Example> batch) {
  const std::size_t B = batch.size();
  const std::size_t C = Sz(spec_.num_classes);
  const std::size_t H = Sz(spec_.hidden);
  losses_.resize(B);
  probs_.resize(B * C);
  hidden_.resize(B * H);
  for (std::size_t i = 0; i < B; ++i) {
    CheckInput(spec_, batch[i].x, batch[i].label);
    std::span<double> z(probs_.data() + i * C, C);
    std::span<double> h(hidden_.data() + i * H, H);
    Logits(spec_, params, batch[i].x, z, h);
    const double zy = z[Sz(batch[i].label)];
    const double lse = SoftmaxInPlace(z);
    losses_[i] = std::max(0.0, lse - zy);
  }
  return losses_;
}

void BatchPass::Backward(std::span<const double> params, std::span<const Example> batch,
                         std::span<const double> weights, std::vector<double>& grad) const {
  Require(weights.size() == batch.size(), "one weight per sample required");
  const std::size_t B = batch.size();
  const std::size_t d = Sz(spec_.input_dim);
  const std::size_t C = Sz(spec_.num_classes);
  grad.assign(spec_.NumParams(), 0.0);
  if (B == 0) return;
  const double inv_b = 1.0 / static_cast<double>(B);
  std::vector<double> dz(C);

  if (spec_.kind == ModelKind::kLinear) {
    double* gW = grad.data();
    double* gb = gW + C * d;
    for (std::size_t i = 0; i < B; ++i) {
      const double scale = weights[i] * inv_b;
      if (scale == 0.0) continue;
      const double* p = probs_.data() + i * C;
      for (std::size_t c = 0; c < C; ++c) {
        const double g = scale * (p[c] - (c == Sz(batch[i].label) ? 1.0 : 0.0));
        gb[c] += g;
        double* row = gW + c * d;
        for (std::size_t j = 0; j < d; ++j) row[j] += g * batch[i].x[j];
      }
    }
    return;
  }

  const std::size_t H = Sz(spec_.hidden);
  const double* W2 = params.data() + H * d + H;
  double* gW1 = grad.data();
  double* gb1 = gW1 + H * d;
  double* gW2 = gb1 + H;
  double* gb2 = gW2 + C * H;
  std::vector<double> da(H);
  for (std::size_t i = 0; i < B; ++i) {
    const double scale = weights[i] * inv_b;
    if (scale == 0.0) continue;
    const double* p = probs_.data() + i * C;
    const double* h = hidden_.data() + i * H;
    for (std::size_t c = 0; c < C; ++c) {
      dz[c] = scale * (p[c] - (c == Sz(batch[i].label) ? 1.0 : 0.0));
    }
    std::fill(da.begin(), da.end(), 0.0);
    for (std::size_t c = 0; c < C; ++c) {
      gb2[c] += dz[c];
      double* grow = gW2 + c * H;
      const double* wrow = W2 + c * H;
      for (std::size_t u = 0; u < H; ++u) {
        grow[u] += dz[c] * h[u];
        da[u] += wrow[u] * dz[c];
      }
    }
    for (std::size_t u = 0; u < H; ++u) {
      const double g = da[u] * (1.0 - h[u] * h[u]);
      gb1[u] += g;
      double* row = gW1 + u * d;
      for (std::size_t j = 0; j < d; ++j) row[j] += g * batch[i].x[j];
    }
  }
}

std::vector<double> Backward(const ModelSpec& spec, std::span<const double> params,
                             std::span<const Example> batch,
                             std::span<const double> weights) {
  BatchPass pass(spec);
  pass.Forward(params, batch);
  std::vector<double> grad;
  pass.Backward(params, batch, weights, grad);
  return grad;
}

OptimizerKind ParseOptimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  Fail(ErrorCode::kInvalidArgument, "unknown optimizer '" + name + "'");
}

std::string ToString(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, std::size_t num_params)
    : kind_(kind), lr_(learning_rate) {
  Require(learning_rate > 0.0, "learning rate must be > 0");
  if (kind_ == OptimizerKind::kAdam) {
    m_.assign(num_params, 0.0);
    v_.assign(num_params, 0.0);
  }
}

void Optimizer::Step(std::vector<double>& params, std::span<const double> grad) {
  Require(grad.size() == params.size(), "gradient size mismatch");
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grad[i];
    return;
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
    v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] -= lr_ * mhat / (std::sqrt(vhat) + kEps);
  }
}

}  // namespace curdisc
