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
#include <optional>
#include <string>

#include "bobench/math.hpp"

namespace bobench {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Matern-5/2 kernel hyperparameters. Lengthscales are per input dimension
// (automatic relevance determination) on the unit-cube input scale;
// output_scale is the prior variance tau^2; nugget is the observation-noise
// variance added to the training covariance diagonal.
struct KernelParams {
  VectorXd lengthscales;
  double output_scale = 1.0;
  double nugget = 1e-6;

  void validate(int dim) const;
};

// Observation set with the affine maps that put it on the model's scale:
// inputs normalized into [0,1]^d via raw_bounds, outputs standardized to
// zero mean and (for n >= 2) unit sample standard deviation. Outputs follow
// the maximization convention.
class Dataset {
 public:
  // bounds is d x 2 (lower, upper per dimension); X_raw is n x d on the raw
  // scale; y is the n-vector of responses to maximize.
  static Dataset from_raw(const MatrixXd& X_raw, const VectorXd& y,
                          const MatrixXd& bounds);
  // Inputs already in the unit cube; bounds default to [0,1]^d.
  static Dataset from_unit(const MatrixXd& X_unit, const VectorXd& y);

  void append_raw(const VectorXd& x_raw, double y);
  void append_unit(const VectorXd& x_unit, double y);

  int size() const { return static_cast<int>(y_.size()); }
  int dim() const { return static_cast<int>(X_unit_.cols()); }

  const MatrixXd& inputs() const { return X_unit_; }
  const VectorXd& outputs() const { return y_; }
  const MatrixXd& raw_bounds() const { return bounds_; }

  double output_shift() const { return shift_; }
  double output_scale_factor() const { return scale_; }

  VectorXd outputs_std() const { return (y_.array() - shift_) / scale_; }
  double to_std(double y) const { return (y - shift_) / scale_; }
  double to_raw_output(double y_std) const { return y_std * scale_ + shift_; }

  VectorXd to_unit(const VectorXd& x_raw) const;
  VectorXd to_raw(const VectorXd& x_unit) const;
  MatrixXd to_raw(const MatrixXd& X_unit) const;

 private:
  Dataset() = default;
  void refresh_standardization();

  MatrixXd X_unit_;
  VectorXd y_;
  MatrixXd bounds_;
  double shift_ = 0.0;
  double scale_ = 1.0;
};

// Posterior over m query points. Variance entries are clamped at zero after
// round-off; covariance and its Cholesky factor are filled only on request.
struct Posterior {
  VectorXd mean;
  VectorXd variance;
  std::optional<MatrixXd> covariance;
  std::optional<MatrixXd> chol;
};

struct CholeskyResult {
  MatrixXd L;
  double jitter = 0.0;
};

double matern52(const VectorXd& x1, const VectorXd& x2, const KernelParams& p);

// Training covariance K_ij = matern52(x_i, x_j) + nugget * [i == j].
MatrixXd build_cov(const MatrixXd& X, const KernelParams& p);

// Cholesky factorization with an escalating diagonal jitter (1e-10 .. 1e-4,
// steps of 10x) on failure; reports the jitter that succeeded.
CholeskyResult cholesky_psd(const MatrixXd& K);

// Cached zero-mean GP predictor: factors the training covariance once and
// serves mean/variance queries cheaply. Works on standardized outputs.
class GpPredictor {
 public:
  GpPredictor(const Dataset& data, const KernelParams& p);
  GpPredictor(const MatrixXd& X_unit, const VectorXd& y_std,
              const KernelParams& p);

  int size() const { return static_cast<int>(X_.rows()); }
  int dim() const { return static_cast<int>(X_.cols()); }
  double jitter() const { return jitter_; }
  const KernelParams& params() const { return p_; }

  double mean(const VectorXd& x_unit) const;
  void mean_var(const VectorXd& x_unit, double& mu, double& var) const;

  // Joint posterior over the rows of Xq; with_cov additionally produces the
  // full covariance and its Cholesky factor.
  Posterior predict(const MatrixXd& Xq, bool with_cov) const;

  // Cross-covariance vector k(x) against the training inputs.
  VectorXd kernel_vec(const VectorXd& x_unit) const;

 private:
  MatrixXd X_;       // training inputs, unit cube
  MatrixXd X_over_l_;  // training inputs scaled by 1/lengthscale
  KernelParams p_;
  MatrixXd L_;
  VectorXd alpha_;
  double jitter_ = 0.0;
};

Posterior gp_posterior(const Dataset& data, const KernelParams& p,
                       const MatrixXd& Xq, bool with_cov = false);

double log_marginal_likelihood(const MatrixXd& X_unit, const VectorXd& y_std,
                               const KernelParams& p);
double log_marginal_likelihood(const Dataset& data, const KernelParams& p);

struct FitConfig {
  int restarts = 10;
  int max_inner_iters = 200;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  // (d+2) x 2 matrix of log-space bounds, rows ordered lengthscales...,
  // output_scale, nugget. Empty means the defaults below.
  MatrixXd param_log_bounds;
};

// Default hyperparameter search box: log l in [log 1e-3, log 1e3],
// log tau^2 in [log 1e-3, log 1e3], log v in [log 1e-6, log 1e-1].
MatrixXd default_param_log_bounds(int dim);

// Heuristic parameters used to seed the search and for degenerate n=1 data:
// l_j = 0.5*sqrt(d), tau^2 = 1, v = 1e-4.
KernelParams heuristic_params(int dim);

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Maximum-likelihood fit by multi-start Nelder-Mead in log-parameter space.
KernelParams fit_gp_mle(const Dataset& data, const FitConfig& cfg);

// Warm-started refit used inside optimization loops: refines the previous
// optimum and checks a handful of fresh probe points, so its result never has
// lower marginal likelihood than `previous`. Throws FitError if every
// candidate fails numerically; callers decide whether to keep `previous`.
KernelParams refit_gp_mle(const Dataset& data, const KernelParams& previous,
                          std::uint64_t seed, int probes = 20,
                          int max_iters = 100, double tol = 1e-6);

}  // namespace bobench
