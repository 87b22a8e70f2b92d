// Copyright 2026 The bobench Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bobench {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// A synthetic benchmark objective on the minimization convention, with known
// global minimum and an optional additive-Gaussian-noise level on the raw
// output scale.
struct TestFunction {
  std::string id;
  int dim = 0;
  MatrixXd bounds;  // dim x 2, (lower, upper)
  double f_opt = 0.0;
  std::optional<VectorXd> x_opt;
  double noise_std = 0.0;
  std::function<double(const VectorXd&)> value;
};

// All registered functions, in a stable order.
const std::vector<TestFunction>& test_functions();

// Lookup by id; throws std::invalid_argument for unknown ids.
const TestFunction& registry(const std::string& id);

// Noise-free evaluation with a bounds check.
double evaluate(const TestFunction& fn, const VectorXd& x);

// Noisy evaluation: adds one N(0, noise_std^2) draw from the caller's stream.
double evaluate_noisy(const TestFunction& fn, const VectorXd& x,
                      class SplitMix64& noise_rng);

enum class DesignKind { kMaximinLhs, kPlainLhs };

struct Design {
  MatrixXd points;  // n x d on the raw scale of the generating bounds
  DesignKind kind = DesignKind::kMaximinLhs;
};

// Latin hypercube on the unit cube improved by random column-swap proposals,
// accepted only when the minimum pairwise distance increases; stratification
// is preserved throughout. Returned on the unit cube.
MatrixXd maximin_lhs_unit(int n, int d, int iters, std::uint64_t seed);

// Same design scaled into the function's raw bounds.
Design maximin_lhs(const TestFunction& fn, int n, int iters, std::uint64_t seed);

}  // namespace bobench
