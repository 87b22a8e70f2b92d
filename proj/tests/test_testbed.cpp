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
#include <set>
#include <stdexcept>
#include <string>

#include "bobench/rng.hpp"
#include "bobench/testbed.hpp"

using namespace bobench;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("registry holds the full benchmark suite") {
  const auto& fns = test_functions();
  CHECK(fns.size() == 8);

  std::set<std::string> ids;
  for (const auto& fn : fns) ids.insert(fn.id);
  for (const char* id : {"sphere10", "dixon_price10", "griewank8", "hartmann6",
                         "hartmann6_low_noise", "hartmann6_high_noise",
                         "michalewicz5", "ackley6"}) {
    CHECK(ids.count(id) == 1);
  }

  const TestFunction& sphere = registry("sphere10");
  CHECK(sphere.dim == 10);
  CHECK(sphere.bounds(0, 0) == -5.12);
  CHECK(sphere.bounds(0, 1) == 5.12);
  CHECK(sphere.f_opt == 0.0);
  REQUIRE(sphere.x_opt.has_value());

  const TestFunction& mich = registry("michalewicz5");
  CHECK(mich.dim == 5);
  CHECK(mich.f_opt == doctest::Approx(-4.687658).epsilon(1e-9));
  CHECK(!mich.x_opt.has_value());  // optimum location is not tabulated

  CHECK(registry("hartmann6").noise_std == 0.0);
  CHECK(registry("hartmann6_low_noise").noise_std == doctest::Approx(0.0155));
  CHECK(registry("hartmann6_high_noise").noise_std == doctest::Approx(0.0266));

  CHECK_THROWS_AS(registry("nope"), std::invalid_argument);
}

TEST_CASE("functions hit their known optima") {
  const TestFunction& sphere = registry("sphere10");
  CHECK(evaluate(sphere, VectorXd::Zero(10)) == 0.0);

  const TestFunction& griewank = registry("griewank8");
  CHECK(std::abs(evaluate(griewank, VectorXd::Zero(8))) < 1e-12);

  const TestFunction& ackley = registry("ackley6");
  CHECK(std::abs(evaluate(ackley, VectorXd::Zero(6))) < 1e-12);

  const TestFunction& hart = registry("hartmann6");
  REQUIRE(hart.x_opt.has_value());
  CHECK(std::abs(evaluate(hart, *hart.x_opt) - (-3.32237)) < 1e-4);

  const TestFunction& dixon = registry("dixon_price10");
  REQUIRE(dixon.x_opt.has_value());
  CHECK(std::abs(evaluate(dixon, *dixon.x_opt)) < 1e-8);
}

TEST_CASE("hartmann coefficient checksums") {
  // Guards against transposed or truncated coefficient tables.
  const TestFunction& hart = registry("hartmann6");
  REQUIRE(hart.x_opt.has_value());
  // Known-point probes: center of the cube and a corner-ish point.
  const double center = evaluate(hart, VectorXd::Constant(6, 0.5));
  CHECK(center == doctest::Approx(-0.5053149917022333).epsilon(1e-9));
  const double off = evaluate(hart, VectorXd::Constant(6, 0.25));
  CHECK(off == doctest::Approx(-0.7168772737066893).epsilon(1e-9));
}

TEST_CASE("evaluate validates its inputs") {
  const TestFunction& sphere = registry("sphere10");
  CHECK_THROWS_AS(evaluate(sphere, VectorXd::Zero(9)), std::invalid_argument);
  VectorXd outside = VectorXd::Zero(10);
  outside(3) = 5.13;
  CHECK_THROWS_AS(evaluate(sphere, outside), std::invalid_argument);
}

TEST_CASE("random search never beats the recorded optimum") {
  SplitMix64 rng(1009);
  for (const TestFunction& fn : test_functions()) {
    const VectorXd lo = fn.bounds.col(0);
    const VectorXd width = fn.bounds.col(1) - fn.bounds.col(0);
    for (int t = 0; t < 1000; ++t) {
      VectorXd x(fn.dim);
      for (int j = 0; j < fn.dim; ++j) x(j) = lo(j) + width(j) * rng.uniform();
      CHECK(fn.value(x) >= fn.f_opt - 1e-9);
    }
  }
}

TEST_CASE("noisy evaluation is reproducible and collapses at zero noise") {
  const TestFunction& noisy = registry("hartmann6_high_noise");
  const VectorXd x = VectorXd::Constant(6, 0.4);
  SplitMix64 r1(77), r2(77);
  const double a = evaluate_noisy(noisy, x, r1);
  const double b = evaluate_noisy(noisy, x, r2);
  CHECK(a == b);
  CHECK(a != evaluate(noisy, x));  // noise_std = 0.0266 makes ties measure-zero

  const TestFunction& clean = registry("hartmann6");
  SplitMix64 r3(77);
  CHECK(evaluate_noisy(clean, x, r3) == evaluate(clean, x));
}

TEST_CASE("maximin design keeps stratification and improves separation") {
  const int n = 12, d = 3;
  const MatrixXd improved = maximin_lhs_unit(n, d, 2000, 5);
  const MatrixXd plain = maximin_lhs_unit(n, d, 0, 5);

  for (int j = 0; j < d; ++j) {
    std::set<int> strata;
    for (int i = 0; i < n; ++i) {
      REQUIRE(improved(i, j) >= 0.0);
      REQUIRE(improved(i, j) < 1.0);
      strata.insert(static_cast<int>(std::floor(improved(i, j) * n)));
    }
    CHECK(strata.size() == static_cast<size_t>(n));
  }

  const auto min_dist = [](const MatrixXd& X) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < X.rows(); ++i) {
      for (int j = i + 1; j < X.rows(); ++j) {
        best = std::min(best, (X.row(i) - X.row(j)).norm());
      }
    }
    return best;
  };
  CHECK(min_dist(improved) >= min_dist(plain));

  CHECK((maximin_lhs_unit(n, d, 2000, 5) - improved).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(maximin_lhs_unit(1, 2, 100, 5), std::invalid_argument);
}

TEST_CASE("two points in one dimension land in opposite halves") {
  const MatrixXd X = maximin_lhs_unit(2, 1, 500, 21);
  const double a = std::min(X(0, 0), X(1, 0));
  const double b = std::max(X(0, 0), X(1, 0));
  CHECK(a < 0.5);
  CHECK(b >= 0.5);
}

TEST_CASE("designs scale into the function bounds") {
  const TestFunction& ackley = registry("ackley6");
  const Design design = maximin_lhs(ackley, 10, 500, 3);
  CHECK(design.kind == DesignKind::kMaximinLhs);
  CHECK(design.points.rows() == 10);
  CHECK(design.points.cols() == 6);
  CHECK(design.points.minCoeff() >= -32.768);
  CHECK(design.points.maxCoeff() <= 32.768);
  // Must genuinely use the raw scale, not the unit cube.
  CHECK(design.points.cwiseAbs().maxCoeff() > 1.0);
}
