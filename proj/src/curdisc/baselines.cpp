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

#include "curdisc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "curdisc/error.hpp"

namespace curdisc {
namespace {

constexpr double kInvE = 1.0 / std::numbers::e;

}  // namespace

std::string ToString(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kNone:
      return "none";
    case StrategyKind::kCurriculum:
      return "curriculum";
    case StrategyKind::kSpl:
      return "spl";
    case StrategyKind::kSuperLoss:
      return "superloss";
    case StrategyKind::kDp:
      return "dp";
    case StrategyKind::kHardMining:
      return "hardmining";
  }
  return "unknown";
}

StrategyKind ParseStrategyKind(const std::string& name) {
  if (name == "none") return StrategyKind::kNone;
  if (name == "curriculum") return StrategyKind::kCurriculum;
  if (name == "spl") return StrategyKind::kSpl;
  if (name == "superloss") return StrategyKind::kSuperLoss;
  if (name == "dp") return StrategyKind::kDp;
  if (name == "hardmining") return StrategyKind::kHardMining;
  Fail(ErrorCode::kInvalidArgument, "unknown strategy '" + name + "'");
}

void WeightingStrategy::Validate() const {
  if (kind == StrategyKind::kSpl || kind == StrategyKind::kSuperLoss) {
    Require(lambda > 0.0, "lambda must be > 0");
  }
  if (kind == StrategyKind::kDp) {
    Require(alpha >= 0.0 && alpha <= 1.0, "alpha must be in [0, 1]");
    Require(std::isnan(tau) || (tau > 0.0 && tau < 1.0), "tau must be in (0, 1)");
  }
  if (kind == StrategyKind::kSuperLoss) {
    Require(ema_decay >= 0.0 && ema_decay < 1.0, "ema_decay must be in [0, 1)");
  }
}

double SplWeight(double loss, double lambda) { return loss < lambda ? 1.0 : 0.0; }

double LambertW0(double x) {
  // Inputs within a few ulps of the branch point are the branch point: W is
  // square-root sensitive there and no iteration can do better.
  if (x <= -kInvE * (1.0 - 8.0 * std::numeric_limits<double>::epsilon())) {
    Require(x >= -kInvE * (1.0 + 1e-12), "LambertW0 domain is x >= -1/e");
    return -1.0;
  }
  if (x == 0.0) return 0.0;

  double w;
  if (x < 0.25) {
    // Series about the branch point.
    const double p = std::sqrt(2.0 * (std::numbers::e * x + 1.0));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else if (x < 3.0) {
    w = std::log1p(x);
  } else {
    const double lx = std::log(x);
    w = lx - std::log(lx);
  }
  for (int iter = 0; iter < 100; ++iter) {
    const double ew = std::exp(w);
    const double step = (w * ew - x) / (ew * (w + 1.0));
    w -= step;
    if (std::abs(step) <= 1e-12 * (1.0 + std::abs(w))) break;
  }
  return w;
}

double SuperLossSigma(double loss, double tau, double lambda) {
  Require(lambda > 0.0, "SuperLoss lambda must be > 0");
  const double beta = std::max((loss - tau) / (2.0 * lambda), -kInvE);
  return std::exp(-LambertW0(beta));
}

double DpWeight(double difficulty, double alpha, double tau) {
  Require(tau < 1.0, "DP tau must be < 1");
  if (difficulty <= tau) return 1.0;
  return 1.0 - alpha * (difficulty - tau) / (1.0 - tau);
}

double DpDifficulty(const AnnotatedSample& sample) {
  if (!sample.counts) {
    Fail(ErrorCode::kInvalidArgument,
         "sample " + std::to_string(sample.id) + " has no annotation counts");
  }
  long total = 0;
  for (int c : *sample.counts) total += c;
  Require(total > 0, "sample " + std::to_string(sample.id) + " has no annotations");
  Require(sample.label >= 0 && sample.label < static_cast<int>(sample.counts->size()),
          "label outside counts vector");
  const long agree = (*sample.counts)[static_cast<std::size_t>(sample.label)];
  return static_cast<double>(total - agree) / static_cast<double>(total);
}

double HardMiningWeight(double loss, std::span<const double> batch_losses) {
  Require(!batch_losses.empty(), "hard mining needs a non-empty batch");
  const auto [lo, hi] = std::minmax_element(batch_losses.begin(), batch_losses.end());
  if (*lo == *hi || *hi <= 0.0) return 1.0;
  return loss / *hi;
}

}  // namespace curdisc
