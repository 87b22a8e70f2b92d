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
#include <array>
#include <cstdint>
#include <string>

namespace bobench {

using Eigen::VectorXd;

enum class AcqFamily {
  kPi,
  kEi,
  kUcb,
  kHedge,
  kMcPi,
  kMcEi,
  kMcUcb,
  kMes,
  kClMin,
  kClMax,
  kGpBucb,
};

enum class BetaMode { kFixed, kVariable };
enum class BatchMode { kSingle, kJoint, kSequential };

// Full acquisition configuration shared by the single-point, Monte Carlo and
// batch strategies. Fields that a family does not use are simply ignored.
struct AcqSpec {
  AcqFamily family = AcqFamily::kEi;
  BetaMode beta_mode = BetaMode::kFixed;
  double beta = 1.0;        // fixed-mode exploration weight (>= 0)
  double delta = 0.1;       // variable-mode confidence parameter in (0,1)
  int mc_samples = 512;     // M base samples per Monte Carlo surface
  double temperature = 0.01;  // sigmoid temperature for the MC probability form
  double hedge_eta = 1.0;   // portfolio softmax gain weight
  int batch_size = 1;       // q
  BatchMode batch_mode = BatchMode::kSingle;

  void validate() const;
  // Resolves the exploration weight for round n (1-based) of a run.
  double resolve_beta(int round, int dim) const;
  // Stable display/CSV name, e.g. "ucb-b5", "mc-ucb-var-q5-seq", "cl-min-q4".
  std::string name() const;
};

double pi(double mu, double sigma, double y_best);
double ei(double mu, double sigma, double y_best);
double ucb(double mu, double sigma, double beta);

// log(pi) and log(ei): same argmax, but stable where the linear-scale values
// underflow to zero (a confident surrogate pushes the improvement z-score
// below -37 over most of the box, flattening the surface the inner optimizer
// sees). Return -inf where the linear value is exactly zero.
double log_pi(double mu, double sigma, double y_best);
double log_ei(double mu, double sigma, double y_best);

// Confidence schedule beta_n = 2 log(d n^2 pi^2 / (6 delta)); increasing in n.
double gp_ucb_beta(int n, int dim, double delta);

// Multiplicative-weights portfolio over {PI, EI, variable-beta UCB}.
struct HedgeState {
  std::array<double, 3> gains{0.0, 0.0, 0.0};
  int round = 0;
  Eigen::MatrixXd pending_proposals;  // 3 x d, rows in member order

  static constexpr int kMembers = 3;
};

// Softmax selection probabilities p_i proportional to exp(eta * g_i),
// computed with max-gain subtraction.
std::array<double, 3> hedge_probabilities(const HedgeState& state, double eta);

// Samples a member index from the softmax given a uniform draw u in [0,1).
int hedge_select(const HedgeState& state, double eta, double u);

// Accumulates the posterior-mean rewards at the three proposals and advances
// the round counter.
HedgeState hedge_update(const HedgeState& state,
                        const std::array<double, 3>& rewards);

}  // namespace bobench
