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

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "bobench/inner_opt.hpp"
#include "bobench/mc_acquisition.hpp"
#include "bobench/rng.hpp"

using namespace bobench;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd v1(double a) {
  VectorXd v(1);
  v << a;
  return v;
}

}  // namespace

TEST_CASE("base samples are reproducible, shaped M x q") {
  const BaseSamples a = BaseSamples::draw(64, 3, 1234);
  const BaseSamples b = BaseSamples::draw(64, 3, 1234);
  const BaseSamples c = BaseSamples::draw(64, 3, 1235);
  CHECK(a.z.rows() == 64);
  CHECK(a.z.cols() == 3);
  CHECK((a.z - b.z).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.z - c.z).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("MC probability of improvement") {
  const MatrixXd L0 = MatrixXd::Zero(1, 1);
  const BaseSamples bs = BaseSamples::draw(2000, 1, 7);
  // A sure 10-unit improvement saturates the sigmoid.
  CHECK(mc_pi(v1(10.0), L0, 0.0, 0.01, bs) >= 0.9999);
  CHECK(mc_pi(v1(-10.0), L0, 0.0, 0.01, bs) <= 1e-4);

  const MatrixXd I1 = MatrixXd::Identity(1, 1);
  const BaseSamples big = BaseSamples::draw(100000, 1, 11);
  CHECK(std::abs(mc_pi(v1(0.0), I1, 0.0, 1e-3, big) - 0.5) < 0.01);

  const BaseSamples huge = BaseSamples::draw(1000000, 1, 13);
  CHECK(std::abs(mc_pi(v1(1.0), I1, 0.0, 1e-3, huge) - 0.8413447460685429) < 0.01);
}

TEST_CASE("MC expected improvement") {
  const MatrixXd L0 = MatrixXd::Zero(1, 1);
  const BaseSamples bs = BaseSamples::draw(512, 1, 3);
  CHECK(mc_ei(v1(-1.0), L0, 0.0, bs) == 0.0);
  CHECK(mc_ei(v1(2.5), L0, 0.0, bs) == doctest::Approx(2.5).epsilon(1e-12));

  const MatrixXd I1 = MatrixXd::Identity(1, 1);
  const BaseSamples huge = BaseSamples::draw(1000000, 1, 5);
  CHECK(std::abs(mc_ei(v1(0.0), I1, 0.0, huge) - 0.3989422804014327) < 0.005);
}

TEST_CASE("a second batch coordinate cannot lower MC-EI") {
  const BaseSamples bs2 = BaseSamples::draw(200000, 2, 9);
  const MatrixXd I2 = MatrixXd::Identity(2, 2);
  VectorXd mu2 = VectorXd::Zero(2);
  const double two = mc_ei(mu2, I2, 0.0, bs2);

  BaseSamples bs1;
  bs1.z = bs2.z.col(0);
  const MatrixXd I1 = MatrixXd::Identity(1, 1);
  const double one = mc_ei(v1(0.0), I1, 0.0, bs1);
  // Pointwise max(0, max(z1,z2)) >= max(0, z1) on the shared first column.
  CHECK(two >= one);
  CHECK(two > one + 0.1);  // the gap is large for independent coordinates
}

TEST_CASE("MC upper confidence bound") {
  VectorXd mu(2);
  mu << 0.3, 0.9;
  MatrixXd L(2, 2);
  L << 0.5, 0.0, 0.2, 0.4;
  const BaseSamples bs = BaseSamples::draw(256, 2, 21);
  // beta = 0 removes the spread term entirely.
  CHECK(mc_ucb(mu, L, 0.0, bs) == doctest::Approx(0.9).epsilon(1e-14));

  const MatrixXd I1 = MatrixXd::Identity(1, 1);
  const BaseSamples huge = BaseSamples::draw(1000000, 1, 23);
  CHECK(std::abs(mc_ucb(v1(0.0), I1, 1.0, huge) - 1.0) < 0.005);
  CHECK(std::abs(mc_ucb(v1(2.0), 3.0 * I1, 4.0, huge) - 8.0) < 0.02);
}

TEST_CASE("MC surfaces are deterministic and permutation-invariant") {
  VectorXd mu(2);
  mu << 0.1, -0.4;
  MatrixXd L(2, 2);
  L << 0.8, 0.0, 0.3, 0.6;
  const BaseSamples bs = BaseSamples::draw(4096, 2, 31);

  CHECK(mc_ei(mu, L, 0.2, bs) == mc_ei(mu, L, 0.2, bs));

  // Swapping the batch coordinates permutes the sample values but not their
  // maximum, so every statistic is unchanged bit for bit.
  VectorXd mu_p(2);
  mu_p << mu(1), mu(0);
  MatrixXd L_p(2, 2);
  L_p.row(0) = L.row(1);
  L_p.row(1) = L.row(0);
  CHECK(mc_ei(mu, L, 0.2, bs) == mc_ei(mu_p, L_p, 0.2, bs));
  CHECK(mc_ucb(mu, L, 2.0, bs) == mc_ucb(mu_p, L_p, 2.0, bs));
  CHECK(mc_pi(mu, L, 0.2, 0.01, bs) == mc_pi(mu_p, L_p, 0.2, 0.01, bs));
}

TEST_CASE("gumbel sampling") {
  CHECK(std::abs(gumbel_sample(0.0, 1.0, std::exp(-1.0))) < 1e-12);
  CHECK(gumbel_sample(0.0, 1.0, 0.5) ==
        doctest::Approx(0.36651292058166433).epsilon(1e-10));
  CHECK(gumbel_sample(2.0, 1.0, std::exp(-1.0)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(gumbel_sample(0.0, 1.0, 0.2) < gumbel_sample(0.0, 1.0, 0.8));
  CHECK_THROWS_AS(gumbel_sample(0.0, 0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(gumbel_sample(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gumbel_sample(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("sampled maxima respect the incumbent floor and replay exactly") {
  MatrixXd X(5, 1);
  X << 0.1, 0.3, 0.5, 0.7, 0.9;
  VectorXd y(5);
  y << 0.0, 1.0, -0.5, 0.4, -0.2;
  Dataset data = Dataset::from_unit(X, y);
  KernelParams p;
  p.lengthscales = v1(0.2);
  p.output_scale = 1.0;
  p.nugget = 1e-4;

  const MatrixXd grid = lhs_unit(200, 1, 3);
  SplitMix64 rng(17);
  VectorXd u(10);
  for (int i = 0; i < 10; ++i) u(i) = rng.uniform_open();

  const MaxValueSamples mvs = sample_max_values(data, p, grid, 10, u);
  CHECK(mvs.values.size() == 10);
  CHECK(mvs.gumbel_b > 0.0);
  const double floor_value = data.outputs_std().maxCoeff() + 1e-6;
  for (int i = 0; i < 10; ++i) CHECK(mvs.values(i) >= floor_value - 1e-12);

  const MaxValueSamples again = sample_max_values(data, p, grid, 10, u);
  CHECK((mvs.values - again.values).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(sample_max_values(data, p, lhs_unit(50, 1, 3), 10, u),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_max_values(data, p, grid, 5, u), std::invalid_argument);
}

TEST_CASE("entropy value of a candidate point") {
  MaxValueSamples mvs;
  mvs.values = v1(0.0);
  // gamma = 0: 0.5*0*hazard - log Phi(0) = log 2.
  CHECK(mes(0.0, 1.0, mvs) == doctest::Approx(0.6931471805599453).epsilon(1e-9));
  // gamma = 1.
  mvs.values = v1(1.0);
  CHECK(mes(0.0, 1.0, mvs) == doctest::Approx(0.31655376449303907).epsilon(1e-6));
  CHECK(std::abs(mes(0.0, 1.0, mvs) - 0.31651) < 1e-4);
  // A max far above anything reachable carries almost no information here.
  mvs.values = v1(40.0);
  CHECK(mes(0.0, 1.0, mvs) >= 0.0);
  CHECK(mes(0.0, 1.0, mvs) < 1e-6);

  mvs.values = v1(0.5);
  CHECK(mes(0.0, 0.0, mvs) == 0.0);
  CHECK_THROWS_AS(mes(0.0, -1.0, mvs), std::invalid_argument);

  // Averaging over several sampled maxima, decreasing as the maxima recede.
  MaxValueSamples near_far;
  near_far.values.resize(2);
  near_far.values << 0.5, 1.5;
  MaxValueSamples far_far;
  far_far.values.resize(2);
  far_far.values << 1.5, 2.5;
  CHECK(mes(0.0, 1.0, near_far) > mes(0.0, 1.0, far_far));
  CHECK(mes(0.0, 1.0, far_far) >= 0.0);

  SplitMix64 rng(8);
  for (int i = 0; i < 50; ++i) {
    MaxValueSamples m;
    m.values = v1(rng.normal());
    CHECK(mes(rng.normal(), 0.1 + rng.uniform(), m) >= 0.0);
  }

  MaxValueSamples empty;
  CHECK_THROWS_AS(mes(0.0, 1.0, empty), std::invalid_argument);
}
