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
#include <stdexcept>

namespace bobench {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using Objective = std::function<double(const VectorXd&)>;

struct OptBudget {
  int restarts = 20;
  int local_iters = 200;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

struct OptResult {
  VectorXd x;
  double value = 0.0;
};

struct OptimizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Latin hypercube sample on the unit cube: one jittered point per stratum in
// every coordinate, strata assigned by independent per-column permutations.
MatrixXd lhs_unit(int n, int d, std::uint64_t seed);

// Nelder-Mead ascent from x0 inside [0,1]^dim with iterates clamped onto the
// box; initial simplex edge 0.05. Returns the best point visited, so the
// result never scores below f(x0). NaN objective values are treated as -inf;
// a NaN start yields a NaN-valued result for the caller to discard.
OptResult local_refine(const Objective& f, const VectorXd& x0, int max_iters,
                       double tol);

// Multi-start bounded maximization over [0,1]^dim: a raw scan of 100*dim
// space-filling probes plus Nelder-Mead refinements from `restarts`
// space-filling starts and from the best probe. Deterministic given the seed.
OptResult maximize(const Objective& f, int dim, const OptBudget& budget);

}  // namespace bobench
