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

#include "bobench/batch.hpp"

#include <cmath>
#include <limits>

#include "bobench/mc_acquisition.hpp"
#include "bobench/rng.hpp"

namespace bobench {

namespace {

constexpr std::uint64_t kBaseSampleStream = 20;
constexpr std::uint64_t kOptStream = 21;
constexpr std::uint64_t kClOptStream = 40;
constexpr std::uint64_t kBucbOptStream = 60;

double mc_value(AcqFamily family, const VectorXd& mu, const MatrixXd& L,
                double y_best, double temp, double beta,
                const BaseSamples& bs) {
  switch (family) {
    case AcqFamily::kMcPi: return mc_pi(mu, L, y_best, temp, bs);
    case AcqFamily::kMcEi: return mc_ei(mu, L, y_best, bs);
    case AcqFamily::kMcUcb: return mc_ucb(mu, L, beta, bs);
    default:
      throw std::invalid_argument("mc batch: family must be mc-pi, mc-ei or mc-ucb");
  }
}

// Posterior sampling factor for the given query set: the scalar standard
// deviation when q = 1, the covariance Cholesky factor otherwise.
MatrixXd sample_factor(const GpPredictor& predictor, const MatrixXd& Xq,
                       VectorXd& mu_out) {
  if (Xq.rows() == 1) {
    double mu = 0.0;
    double var = 0.0;
    predictor.mean_var(Xq.row(0).transpose(), mu, var);
    mu_out = VectorXd::Constant(1, mu);
    return MatrixXd::Constant(1, 1, std::sqrt(var));
  }
  const Posterior post = predictor.predict(Xq, true);
  mu_out = post.mean;
  return *post.chol;
}

}  // namespace

BatchProposal propose_mc_joint(const Dataset& data, const KernelParams& p,
                               const AcqSpec& spec, int round,
                               std::uint64_t seed) {
  spec.validate();
  const int q = spec.batch_size;
  const int d = data.dim();
  const double beta = spec.resolve_beta(round, d);
  const double y_best = data.outputs_std().maxCoeff();
  const BaseSamples bs =
      BaseSamples::draw(spec.mc_samples, q, derive_seed(seed, kBaseSampleStream));
  const GpPredictor predictor(data, p);

  const Objective f = [&](const VectorXd& u) -> double {
    MatrixXd Xq(q, d);
    for (int j = 0; j < q; ++j) {
      Xq.row(j) = u.segment(j * d, d).transpose();
    }
    try {
      VectorXd mu;
      const MatrixXd L = sample_factor(predictor, Xq, mu);
      return mc_value(spec.family, mu, L, y_best, spec.temperature, beta, bs);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  OptBudget budget;
  budget.restarts = 20 * q;
  budget.seed = derive_seed(seed, kOptStream);
  const OptResult r = maximize(f, q * d, budget);

  BatchProposal prop;
  prop.provenance = BatchProvenance::kMcJoint;
  prop.points.resize(q, d);
  for (int j = 0; j < q; ++j) {
    prop.points.row(j) = r.x.segment(j * d, d).transpose();
  }
  prop.acq_values = VectorXd::Constant(1, r.value);
  return prop;
}

BatchProposal propose_mc_sequential(const Dataset& data, const KernelParams& p,
                                    const AcqSpec& spec, int round,
                                    std::uint64_t seed) {
  spec.validate();
  const int q = spec.batch_size;
  const int d = data.dim();
  const double beta = spec.resolve_beta(round, d);
  const double y_best = data.outputs_std().maxCoeff();
  const BaseSamples bs =
      BaseSamples::draw(spec.mc_samples, q, derive_seed(seed, kBaseSampleStream));
  const GpPredictor predictor(data, p);

  BatchProposal prop;
  prop.provenance = BatchProvenance::kMcSequential;
  prop.points.resize(q, d);
  prop.acq_values.resize(q);

  for (int j = 1; j <= q; ++j) {
    BaseSamples bs_j;
    bs_j.seed = bs.seed;
    bs_j.z = bs.z.leftCols(j);

    const Objective f = [&, j](const VectorXd& x) -> double {
      MatrixXd Xq(j, d);
      if (j > 1) Xq.topRows(j - 1) = prop.points.topRows(j - 1);
      Xq.row(j - 1) = x.transpose();
      try {
        VectorXd mu;
        const MatrixXd L = sample_factor(predictor, Xq, mu);
        return mc_value(spec.family, mu, L, y_best, spec.temperature, beta, bs_j);
      } catch (const NumericalError&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    };

    OptBudget budget;
    budget.seed = derive_seed(seed, kOptStream + (j - 1));
    const OptResult r = maximize(f, d, budget);
    prop.points.row(j - 1) = r.x.transpose();
    prop.acq_values(j - 1) = r.value;
  }
  return prop;
}

BatchProposal propose_constant_liar(const Dataset& data, const KernelParams& p,
                                    const AcqSpec& spec, LieMode lie_mode,
                                    std::uint64_t seed) {
  spec.validate();
  const int q = spec.batch_size;
  const int d = data.dim();
  const VectorXd y_std = data.outputs_std();
  const double y_best = y_std.maxCoeff();
  const double lie = (lie_mode == LieMode::kMin) ? y_std.minCoeff() : y_std.maxCoeff();

  // Fantasy copies; the caller's dataset is never touched.
  MatrixXd Xf(data.size() + q, d);
  VectorXd yf(data.size() + q);
  Xf.topRows(data.size()) = data.inputs();
  yf.head(data.size()) = y_std;

  BatchProposal prop;
  prop.provenance =
      (lie_mode == LieMode::kMin) ? BatchProvenance::kClMin : BatchProvenance::kClMax;
  prop.points.resize(q, d);
  prop.acq_values.resize(q);

  for (int b = 0; b < q; ++b) {
    const int n = data.size() + b;
    const GpPredictor predictor(Xf.topRows(n), yf.head(n), p);
    // The optimizer works on log(EI), which keeps the surface informative
    // where linear EI underflows; the reported value stays linear-scale.
    const Objective f = [&](const VectorXd& x) -> double {
      try {
        double mu = 0.0;
        double var = 0.0;
        predictor.mean_var(x, mu, var);
        return log_ei(mu, std::sqrt(var), y_best);
      } catch (const NumericalError&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    };
    OptBudget budget;
    // Round 0 reuses the caller's seed so a q=1 batch is bitwise identical
    // to the plain single-point proposal.
    budget.seed = (b == 0) ? seed : derive_seed(seed, kClOptStream + b);
    const OptResult r = maximize(f, d, budget);
    prop.points.row(b) = r.x.transpose();
    double mu_star = 0.0;
    double var_star = 0.0;
    predictor.mean_var(r.x, mu_star, var_star);
    prop.acq_values(b) = ei(mu_star, std::sqrt(var_star), y_best);
    Xf.row(data.size() + b) = r.x.transpose();
    yf(data.size() + b) = lie;
  }
  return prop;
}

BatchProposal propose_gp_bucb(const Dataset& data, const KernelParams& p,
                              const AcqSpec& spec, int round,
                              std::uint64_t seed) {
  spec.validate();
  const int q = spec.batch_size;
  const int d = data.dim();
  const double beta = spec.resolve_beta(round, d);
  const GpPredictor mean_model(data, p);

  // Inputs the variance is conditioned on: the real data plus every batch
  // point chosen so far. No responses are needed for variance updates.
  MatrixXd Xc(data.size() + q, d);
  Xc.topRows(data.size()) = data.inputs();

  BatchProposal prop;
  prop.provenance = BatchProvenance::kGpBucb;
  prop.points.resize(q, d);
  prop.acq_values.resize(q);

  for (int b = 0; b < q; ++b) {
    const int n = data.size() + b;
    const GpPredictor var_model(Xc.topRows(n), VectorXd::Zero(n), p);
    const Objective f = [&](const VectorXd& x) -> double {
      try {
        double mu_unused = 0.0;
        double var = 0.0;
        var_model.mean_var(x, mu_unused, var);
        return ucb(mean_model.mean(x), std::sqrt(var), beta);
      } catch (const NumericalError&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    };
    OptBudget budget;
    budget.seed = (b == 0) ? seed : derive_seed(seed, kBucbOptStream + b);
    const OptResult r = maximize(f, d, budget);
    prop.points.row(b) = r.x.transpose();
    prop.acq_values(b) = r.value;
    Xc.row(data.size() + b) = r.x.transpose();
  }
  return prop;
}

}  // namespace bobench
