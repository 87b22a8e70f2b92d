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

#include "bobench/mc_acquisition.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bobench/math.hpp"
#include "bobench/rng.hpp"

namespace bobench {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_shapes(const VectorXd& mu_q, const MatrixXd& L_q,
                  const BaseSamples& bs) {
  const auto q = mu_q.size();
  if (L_q.rows() != q || L_q.cols() != q) {
    throw std::invalid_argument("mc acquisition: L must be q x q");
  }
  if (bs.z.cols() != q || bs.z.rows() < 1) {
    throw std::invalid_argument("mc acquisition: base samples must be M x q");
  }
}

// Rows of the posterior-sample matrix mu^T + (L z_m)^T, one per base sample.
MatrixXd posterior_samples(const VectorXd& mu_q, const MatrixXd& L_q,
                           const BaseSamples& bs) {
  MatrixXd S = bs.z * L_q.transpose();
  S.rowwise() += mu_q.transpose();
  return S;
}

}  // namespace

BaseSamples BaseSamples::draw(int m, int q, std::uint64_t seed) {
  if (m < 1 || q < 1) throw std::invalid_argument("BaseSamples: m and q must be >= 1");
  BaseSamples bs;
  bs.seed = seed;
  bs.z.resize(m, q);
  SplitMix64 rng(seed);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < q; ++j) {
      bs.z(i, j) = rng.normal();
    }
  }
  return bs;
}

double mc_pi(const VectorXd& mu_q, const MatrixXd& L_q, double y_best,
             double temp, const BaseSamples& bs) {
  if (!(temp > 0.0)) throw std::invalid_argument("mc_pi: temperature must be > 0");
  check_shapes(mu_q, L_q, bs);
  const VectorXd mx = posterior_samples(mu_q, L_q, bs).rowwise().maxCoeff();
  double acc = 0.0;
  for (int i = 0; i < mx.size(); ++i) {
    acc += sigmoid((mx(i) - y_best) / temp);
  }
  return acc / static_cast<double>(mx.size());
}

double mc_ei(const VectorXd& mu_q, const MatrixXd& L_q, double y_best,
             const BaseSamples& bs) {
  check_shapes(mu_q, L_q, bs);
  const VectorXd mx = posterior_samples(mu_q, L_q, bs).rowwise().maxCoeff();
  return (mx.array() - y_best).max(0.0).mean();
}

double mc_ucb(const VectorXd& mu_q, const MatrixXd& L_q, double beta,
              const BaseSamples& bs) {
  if (beta < 0.0) throw std::invalid_argument("mc_ucb: beta must be >= 0");
  check_shapes(mu_q, L_q, bs);
  const double c = std::sqrt(beta * std::numbers::pi / 2.0);
  MatrixXd S = (bs.z * L_q.transpose()).cwiseAbs() * c;
  S.rowwise() += mu_q.transpose();
  return S.rowwise().maxCoeff().mean();
}

double gumbel_sample(double a, double b, double u) {
  if (!(b > 0.0)) throw std::invalid_argument("gumbel_sample: scale must be > 0");
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("gumbel_sample: u must lie in (0,1)");
  return a - b * std::log(-std::log(u));
}

MaxValueSamples sample_max_values(const Dataset& data, const KernelParams& p,
                                  const MatrixXd& candidate_grid, int m_star,
                                  const VectorXd& uniforms) {
  if (candidate_grid.rows() < 100) {
    throw std::invalid_argument("sample_max_values: need at least 100 grid points");
  }
  if (m_star < 1 || uniforms.size() != m_star) {
    throw std::invalid_argument("sample_max_values: need one uniform per sample");
  }

  const GpPredictor predictor(data, p);
  const Posterior post = predictor.predict(candidate_grid, false);
  const VectorXd sd = post.variance.cwiseSqrt();
  if (sd.maxCoeff() <= 0.0) {
    throw FitError("sample_max_values: posterior is degenerate (all sigma = 0)");
  }
  const VectorXd sd_safe = sd.cwiseMax(1e-12);

  // log CDF of the independent-marginal max over the grid.
  auto log_cdf = [&](double z) {
    double acc = 0.0;
    for (int g = 0; g < post.mean.size(); ++g) {
      acc += normal_logcdf((z - post.mean(g)) / sd_safe(g));
    }
    return acc;
  };

  const double spread = 8.0 * sd.maxCoeff();
  double lo = (post.mean - 8.0 * sd_safe).minCoeff();
  double hi = (post.mean + 8.0 * sd_safe).maxCoeff();
  auto quantile = [&](double prob) {
    const double target = std::log(prob);
    double a = lo;
    double b = hi;
    while (log_cdf(a) > target) a -= spread;
    while (log_cdf(b) < target) b += spread;
    for (int i = 0; i < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a)); ++i) {
      const double mid = 0.5 * (a + b);
      (log_cdf(mid) < target ? a : b) = mid;
    }
    return 0.5 * (a + b);
  };

  const double z25 = quantile(0.25);
  const double z75 = quantile(0.75);
  // Gumbel quantiles: z_p = a - b log(-log p).
  const double c25 = std::log(std::log(4.0));
  const double c75 = std::log(std::log(4.0 / 3.0));
  const double b_fit = (z75 - z25) / (c25 - c75);
  if (!(b_fit > 1e-12) || !std::isfinite(b_fit)) {
    throw FitError("sample_max_values: degenerate max distribution");
  }
  const double a_fit = z25 + b_fit * c25;

  const double floor_value = data.outputs_std().maxCoeff() + 1e-6;
  MaxValueSamples mvs;
  mvs.gumbel_a = a_fit;
  mvs.gumbel_b = b_fit;
  mvs.values.resize(m_star);
  for (int i = 0; i < m_star; ++i) {
    mvs.values(i) = std::max(gumbel_sample(a_fit, b_fit, uniforms(i)), floor_value);
  }
  return mvs;
}

double mes(double mu, double sigma, const MaxValueSamples& mvs) {
  if (sigma < 0.0) throw std::invalid_argument("mes: sigma must be >= 0");
  if (mvs.values.size() < 1) throw std::invalid_argument("mes: no max-value samples");
  if (sigma == 0.0) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < mvs.values.size(); ++i) {
    const double gamma = (mvs.values(i) - mu) / sigma;
    acc += 0.5 * gamma * normal_hazard(gamma) - normal_logcdf(gamma);
  }
  return std::max(acc / static_cast<double>(mvs.values.size()), 0.0);
}

}  // namespace bobench
