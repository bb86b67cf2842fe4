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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "curdisc/baselines.hpp"
#include "curdisc/error.hpp"
#include "curdisc/rng.hpp"
#include "doctest.h"

using namespace curdisc;

namespace {

// Golden-section minimization of (l - tau) e^u + lambda u^2 over u = ln sigma.
// The objective is convex on (-inf, 1] whenever l - tau >= -2 lambda / e.
double NumericSigma(double l, double tau, double lambda) {
  auto f = [&](double u) { return (l - tau) * std::exp(u) + lambda * u * u; };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = -60.0, b = 1.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return std::exp((a + b) / 2.0);
}

AnnotatedSample WithCounts(std::vector<int> counts, int label) {
  AnnotatedSample s;
  s.counts = std::move(counts);
  s.label = label;
  return s;
}

}  // namespace

TEST_CASE("spl weight") {
  CHECK(SplWeight(0.8, 1.2) == 1.0);
  CHECK(SplWeight(1.2, 1.2) == 0.0);
  CHECK(SplWeight(5.0, 1.2) == 0.0);
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double l = rng.Uniform(0, 3), lambda = rng.Uniform(0.1, 2);
    CHECK(SplWeight(l, lambda) == (l < lambda ? 1.0 : 0.0));
  }
}

TEST_CASE("lambert w") {
  CHECK(LambertW0(0.0) == 0.0);
  CHECK(LambertW0(-1.0 / std::numbers::e) == -1.0);
  CHECK(LambertW0(std::numbers::e) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(LambertW0(1.0) == doctest::Approx(0.5671432904097838).epsilon(1e-14));
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = -1.0 / std::numbers::e + rng.Uniform() * 50.0;
    const double w = LambertW0(x);
    CHECK(w >= -1.0);
    CHECK(w * std::exp(w) == doctest::Approx(x).epsilon(1e-10));
  }
  CHECK_THROWS_AS(LambertW0(-0.5), Error);
}

TEST_CASE("superloss closed form values") {
  CHECK(SuperLossSigma(0.7, 0.7, 1.2) == 1.0);
  const double lambda = 0.8;
  CHECK(std::abs(SuperLossSigma(1.0 - 2.0 * lambda / std::numbers::e, 1.0, lambda) - std::numbers::e) < 1e-9);
  CHECK(SuperLossSigma(-10.0, 1.0, lambda) == doctest::Approx(std::numbers::e).epsilon(1e-15));
  CHECK(std::abs(SuperLossSigma(1.0 + 2.0 * lambda, 1.0, lambda) - 0.5671432904097838) < 1e-9);
  CHECK_THROWS_AS(SuperLossSigma(1.0, 1.0, 0.0), Error);
}

TEST_CASE("superloss matches numeric minimizer and is monotone") {
  Rng rng(11);
  int checked = 0;
  while (checked < 1000) {
    const double l = rng.Uniform(0, 4), tau = rng.Uniform(0, 2), lambda = rng.Uniform(0.05, 3);
    if (l - tau < -2.0 * lambda / std::numbers::e) continue;
    CHECK(std::abs(SuperLossSigma(l, tau, lambda) - NumericSigma(l, tau, lambda)) < 1e-6);
    ++checked;
  }
  double prev = SuperLossSigma(0.0, 1.0, 0.5);
  for (int i = 1; i <= 400; ++i) {
    const double s = SuperLossSigma(i * 0.01, 1.0, 0.5);
    CHECK(s <= prev);
    CHECK(s > 0.0);
    CHECK(s <= std::numbers::e);
    prev = s;
  }
}

TEST_CASE("dp weight and difficulty") {
  CHECK(DpWeight(0.4, 0.9, 0.4) == 1.0);
  CHECK(DpWeight(1.0, 0.9, 0.4) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(DpWeight(0.1, 0.9, 0.4) == 1.0);
  double prev = 1.0;
  for (int i = 0; i <= 100; ++i) {
    const double w = DpWeight(i / 100.0, 0.7, 0.3);
    CHECK(w <= prev);
    CHECK(w >= 0.3 - 1e-15);
    CHECK(w <= 1.0);
    prev = w;
  }
  CHECK_THROWS_AS(DpWeight(0.5, 0.9, 1.0), Error);

  CHECK(DpDifficulty(WithCounts({5, 0}, 0)) == 0.0);
  CHECK(DpDifficulty(WithCounts({3, 2}, 0)) == doctest::Approx(0.4));
  CHECK(DpDifficulty(WithCounts({0, 5}, 0)) == 1.0);
  AnnotatedSample none;
  CHECK_THROWS_AS(DpDifficulty(none), Error);
}

TEST_CASE("hard mining weight") {
  const std::vector<double> batch = {0.0, 0.4, 2.0, 1.0};
  CHECK(HardMiningWeight(2.0, batch) == 1.0);
  CHECK(HardMiningWeight(0.0, batch) == 0.0);
  std::vector<double> w;
  for (double l : batch) w.push_back(HardMiningWeight(l, batch));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t j = 0; j < batch.size(); ++j) {
      if (batch[i] < batch[j]) CHECK(w[i] < w[j]);
    }
  }
  const std::vector<double> flat = {0.3, 0.3};
  CHECK(HardMiningWeight(0.3, flat) == 1.0);
  CHECK_THROWS_AS(HardMiningWeight(1.0, std::vector<double>{}), Error);
}

TEST_CASE("strategy names and validation") {
  for (auto k : {StrategyKind::kNone, StrategyKind::kCurriculum, StrategyKind::kSpl,
                 StrategyKind::kSuperLoss, StrategyKind::kDp, StrategyKind::kHardMining}) {
    CHECK(ParseStrategyKind(ToString(k)) == k);
  }
  CHECK_THROWS_AS(ParseStrategyKind("mentornet"), Error);
  WeightingStrategy s;
  s.kind = StrategyKind::kDp;
  s.tau = 1.5;
  CHECK_THROWS_AS(s.Validate(), Error);
  s.tau = 0.5;
  s.Validate();
  s.kind = StrategyKind::kSpl;
  s.lambda = 0.0;
  CHECK_THROWS_AS(s.Validate(), Error);
}
