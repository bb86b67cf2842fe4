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

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "curdisc/dataset.hpp"

namespace curdisc {

enum class StrategyKind { kNone, kCurriculum, kSpl, kSuperLoss, kDp, kHardMining };

std::string ToString(StrategyKind kind);
StrategyKind ParseStrategyKind(const std::string& name);

// Static description of how per-sample loss weights are produced. Running
// state (the SuperLoss threshold) lives in StrategyState, owned by one
// training run.
struct WeightingStrategy {
  StrategyKind kind = StrategyKind::kNone;
  // SPL threshold, or SuperLoss regularization strength.
  double lambda = 1.2;
  // Linear growth of the SPL threshold: lambda * (1 + spl_growth * t).
  double spl_growth = 0.0;
  // DP re-weighting strength and threshold; a NaN tau is replaced by the
  // median difficulty of the training set.
  double alpha = 0.9;
  double tau = std::numeric_limits<double>::quiet_NaN();
  // SuperLoss moving-average decay.
  double ema_decay = 0.9;

  void Validate() const;
};

// Binary self-paced weight: 1 if loss < lambda, else 0.
double SplWeight(double loss, double lambda);

// Principal branch of the Lambert W function for x >= -1/e.
double LambertW0(double x);

// Optimal confidence argmin_sigma (l - tau) sigma + lambda (ln sigma)^2,
// i.e. exp(-W(beta)) with beta = max((l - tau) / (2 lambda), -1/e).
double SuperLossSigma(double loss, double tau, double lambda);

// 1 for d <= tau; 1 - alpha (d - tau) / (1 - tau) above the threshold.
double DpWeight(double difficulty, double alpha, double tau);

// Fraction of annotations that disagree with the gold label.
double DpDifficulty(const AnnotatedSample& sample);

// l / max(batch); 1 when every loss in the batch is equal.
double HardMiningWeight(double loss, std::span<const double> batch_losses);

}  // namespace curdisc
