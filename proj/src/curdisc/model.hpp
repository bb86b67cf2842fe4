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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace curdisc {

enum class ModelKind { kLinear, kMlp };

// Architecture of the classifier. Parameters live in one flat vector:
//   linear: W[C][d], b[C]
//   mlp:    W1[h][d], b1[h], W2[C][h], b2[C]   (tanh hidden layer)
struct ModelSpec {
  ModelKind kind = ModelKind::kLinear;
  int hidden = 0;
  int input_dim = 0;
  int num_classes = 0;

  std::size_t NumParams() const;
  std::string Name() const;  // "linear" or "mlp<h>"
  bool operator==(const ModelSpec&) const = default;
};

// "linear", "mlp", "mlp16", "mlp64"... Dimensions are filled in later.
ModelSpec ParseModel(const std::string& name);

// Weights ~ Uniform(-scale, scale) from `seed`, biases 0.
std::vector<double> InitParams(const ModelSpec& spec, std::uint64_t seed,
                               double scale = 0.05);

struct Example {
  std::span<const double> x;
  int label = 0;
};

struct LossAndProbs {
  double loss = 0.0;
  std::vector<double> probs;
};

// Softmax cross-entropy with log-sum-exp stabilization. Throws on non-finite
// or mis-sized features.
LossAndProbs ForwardLoss(const ModelSpec& spec, std::span<const double> params,
                         std::span<const double> x, int label);

int Predict(const ModelSpec& spec, std::span<const double> params,
            std::span<const double> x);

// Forward pass over a batch that keeps what the backward pass needs.
class BatchPass {
 public:
  explicit BatchPass(const ModelSpec& spec) : spec_(spec) {}

  // Fills per-sample losses; returns them.
  std::span<const double> Forward(std::span<const double> params,
                                  std::span<const Example> batch);

  // Accumulates into `grad` (resized and zeroed) the gradient of
  // (1/B) * sum_i weights[i] * loss_i for the batch last passed to Forward.
  void Backward(std::span<const double> params, std::span<const Example> batch,
                std::span<const double> weights, std::vector<double>& grad) const;

  std::span<const double> losses() const { return losses_; }

 private:
  ModelSpec spec_;
  std::vector<double> losses_;
  std::vector<double> probs_;   // [B][C]
  std::vector<double> hidden_;  // [B][h], mlp only
};

// Convenience wrapper: gradient of the weighted mean batch loss.
std::vector<double> Backward(const ModelSpec& spec, std::span<const double> params,
                             std::span<const Example> batch,
                             std::span<const double> weights);

enum class OptimizerKind { kSgd, kAdam };

OptimizerKind ParseOptimizer(const std::string& name);
std::string ToString(OptimizerKind kind);

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, std::size_t num_params);

  void Step(std::vector<double>& params, std::span<const double> grad);

 private:
  OptimizerKind kind_;
  double lr_;
  std::vector<double> m_;
  std::vector<double> v_;
  long step_ = 0;
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
};

}  // namespace curdisc
