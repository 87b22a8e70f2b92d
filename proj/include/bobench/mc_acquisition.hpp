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

#include "bobench/gp.hpp"

namespace bobench {

// Standard-normal draws shared by every evaluation of a Monte Carlo
// acquisition surface within one optimization, so the surface is a
// deterministic function and the inner maximization is well-posed.
struct BaseSamples {
  Eigen::MatrixXd z;  // M x q
  std::uint64_t seed = 0;

  static BaseSamples draw(int m, int q, std::uint64_t seed);
};

// Posterior samples are mu + L z (reparameterization); the batch statistic is
// the max over the q coordinates, averaged over the M base samples.
double mc_pi(const VectorXd& mu_q, const MatrixXd& L_q, double y_best,
             double temp, const BaseSamples& bs);
double mc_ei(const VectorXd& mu_q, const MatrixXd& L_q, double y_best,
             const BaseSamples& bs);
// Upper confidence form with the element-wise |L z| spread term.
double mc_ucb(const VectorXd& mu_q, const MatrixXd& L_q, double beta,
              const BaseSamples& bs);

// Sampled optima of the objective used by the entropy-based acquisition,
// drawn from a Gumbel(a, b) approximation to the posterior max distribution.
struct MaxValueSamples {
  VectorXd values;
  double gumbel_a = 0.0;
  double gumbel_b = 1.0;
};

// Inverse-CDF Gumbel draw: a - b log(-log u).
double gumbel_sample(double a, double b, double u);

// Fits the Gumbel approximation to the distribution of the posterior max over
// the candidate grid (independent-marginal CDF, quantile matching at 0.25 and
// 0.75), then draws m_star optima from it. Every returned value is truncated
// below at max observed standardized response + 1e-6.
MaxValueSamples sample_max_values(const Dataset& data, const KernelParams& p,
                                  const MatrixXd& candidate_grid, int m_star,
                                  const VectorXd& uniforms);

// Per-point information value given the sampled optima; zero when sigma = 0.
double mes(double mu, double sigma, const MaxValueSamples& mvs);

}  // namespace bobench
