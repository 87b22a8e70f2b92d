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

#include "bobench/testbed.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "bobench/inner_opt.hpp"
#include "bobench/rng.hpp"

namespace bobench {

namespace {

MatrixXd cube_bounds(int dim, double lo, double hi) {
  MatrixXd b(dim, 2);
  b.col(0).setConstant(lo);
  b.col(1).setConstant(hi);
  return b;
}

double sphere(const VectorXd& x) { return x.squaredNorm(); }

double dixon_price(const VectorXd& x) {
  double acc = (x(0) - 1.0) * (x(0) - 1.0);
  for (int i = 1; i < x.size(); ++i) {
    const double t = 2.0 * x(i) * x(i) - x(i - 1);
    acc += (i + 1) * t * t;
  }
  return acc;
}

double griewank(const VectorXd& x) {
  double sum = 0.0;
  double prod = 1.0;
  for (int i = 0; i < x.size(); ++i) {
    sum += x(i) * x(i) / 4000.0;
    prod *= std::cos(x(i) / std::sqrt(i + 1.0));
  }
  return sum - prod + 1.0;
}

const Eigen::Matrix<double, 4, 6>& hartmann_A() {
  static const Eigen::Matrix<double, 4, 6> A = [] {
    Eigen::Matrix<double, 4, 6> m;
    m << 10.0, 3.0, 17.0, 3.5, 1.7, 8.0,
         0.05, 10.0, 17.0, 0.1, 8.0, 14.0,
         3.0, 3.5, 1.7, 10.0, 17.0, 8.0,
         17.0, 8.0, 0.05, 10.0, 0.1, 14.0;
    return m;
  }();
  return A;
}

const Eigen::Matrix<double, 4, 6>& hartmann_P() {
  static const Eigen::Matrix<double, 4, 6> P = [] {
    Eigen::Matrix<double, 4, 6> m;
    m << 1312, 1696, 5569, 124, 8283, 5886,
         2329, 4135, 8307, 3736, 1004, 9991,
         2348, 1451, 3522, 2883, 3047, 6650,
         4047, 8828, 8732, 5743, 1091, 381;
    m *= 1e-4;
    return m;
  }();
  return P;
}

double hartmann6(const VectorXd& x) {
  static const Eigen::Vector4d alpha(1.0, 1.2, 3.0, 3.2);
  const auto& A = hartmann_A();
  const auto& P = hartmann_P();
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 6; ++j) {
      const double diff = x(j) - P(i, j);
      inner += A(i, j) * diff * diff;
    }
    acc -= alpha(i) * std::exp(-inner);
  }
  return acc;
}

double michalewicz(const VectorXd& x) {
  constexpr int m = 10;
  double acc = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double s = std::sin((i + 1) * x(i) * x(i) / std::numbers::pi);
    acc -= std::sin(x(i)) * std::pow(s, 2 * m);
  }
  return acc;
}

// Ackley with a = 20, b = 0.5, c = 0: the cosine term is identically exp(1)
// and cancels, leaving a smooth radial bowl.
double ackley(const VectorXd& x) {
  constexpr double a = 20.0;
  constexpr double b = 0.5;
  constexpr double c = 0.0;
  const double d = static_cast<double>(x.size());
  const double radial = std::sqrt(x.squaredNorm() / d);
  const double cosine = (c * x.array()).cos().mean();
  return -a * std::exp(-b * radial) - std::exp(cosine) + a + std::numbers::e;
}

VectorXd dixon_price_opt(int dim) {
  VectorXd x(dim);
  for (int i = 1; i <= dim; ++i) {
    const double p2 = std::pow(2.0, static_cast<double>(i));
    x(i - 1) = std::pow(2.0, -(p2 - 2.0) / p2);
  }
  return x;
}

VectorXd hartmann_opt() {
  VectorXd x(6);
  x << 0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573;
  return x;
}

std::vector<TestFunction> build_registry() {
  std::vector<TestFunction> fns;

  TestFunction f;
  f.id = "sphere10";
  f.dim = 10;
  f.bounds = cube_bounds(10, -5.12, 5.12);
  f.f_opt = 0.0;
  f.x_opt = VectorXd::Zero(10);
  f.noise_std = 0.0;
  f.value = sphere;
  fns.push_back(f);

  f = TestFunction{};
  f.id = "dixon_price10";
  f.dim = 10;
  f.bounds = cube_bounds(10, -10.0, 10.0);
  f.f_opt = 0.0;
  f.x_opt = dixon_price_opt(10);
  f.noise_std = 0.0;
  f.value = dixon_price;
  fns.push_back(f);

  f = TestFunction{};
  f.id = "griewank8";
  f.dim = 8;
  f.bounds = cube_bounds(8, -600.0, 600.0);
  f.f_opt = 0.0;
  f.x_opt = VectorXd::Zero(8);
  f.noise_std = 0.0;
  f.value = griewank;
  fns.push_back(f);

  f = TestFunction{};
  f.id = "hartmann6";
  f.dim = 6;
  f.bounds = cube_bounds(6, 0.0, 1.0);
  f.f_opt = -3.32237;
  f.x_opt = hartmann_opt();
  f.noise_std = 0.0;
  f.value = hartmann6;
  fns.push_back(f);

  f.id = "hartmann6_low_noise";
  f.noise_std = 0.0155;
  fns.push_back(f);

  f.id = "hartmann6_high_noise";
  f.noise_std = 0.0266;
  fns.push_back(f);

  f = TestFunction{};
  f.id = "michalewicz5";
  f.dim = 5;
  f.bounds = cube_bounds(5, 0.0, std::numbers::pi);
  f.f_opt = -4.687658;
  f.x_opt = std::nullopt;
  f.noise_std = 0.0;
  f.value = michalewicz;
  fns.push_back(f);

  f = TestFunction{};
  f.id = "ackley6";
  f.dim = 6;
  f.bounds = cube_bounds(6, -32.768, 32.768);
  f.f_opt = 0.0;
  f.x_opt = VectorXd::Zero(6);
  f.noise_std = 0.0;
  f.value = ackley;
  fns.push_back(f);

  return fns;
}

}  // namespace

const std::vector<TestFunction>& test_functions() {
  static const std::vector<TestFunction> fns = build_registry();
  return fns;
}

const TestFunction& registry(const std::string& id) {
  for (const TestFunction& fn : test_functions()) {
    if (fn.id == id) return fn;
  }
  throw std::invalid_argument("unknown test function id: " + id);
}

double evaluate(const TestFunction& fn, const VectorXd& x) {
  if (x.size() != fn.dim) {
    throw std::invalid_argument(fn.id + ": dimension mismatch");
  }
  if ((x.array() < fn.bounds.col(0).array()).any() ||
      (x.array() > fn.bounds.col(1).array()).any()) {
    throw std::invalid_argument(fn.id + ": point outside bounds");
  }
  return fn.value(x);
}

double evaluate_noisy(const TestFunction& fn, const VectorXd& x,
                      SplitMix64& noise_rng) {
  const double clean = evaluate(fn, x);
  if (fn.noise_std <= 0.0) return clean;
  return clean + fn.noise_std * noise_rng.normal();
}

MatrixXd maximin_lhs_unit(int n, int d, int iters, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("maximin_lhs: need n >= 2");
  if (d < 1 || iters < 0) throw std::invalid_argument("maximin_lhs: bad arguments");

  MatrixXd X = lhs_unit(n, d, derive_seed(seed, 1));

  MatrixXd D2(n, n);
  const double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    D2(i, i) = inf;
    for (int j = i + 1; j < n; ++j) {
      D2(i, j) = D2(j, i) = (X.row(i) - X.row(j)).squaredNorm();
    }
  }
  double current_min = D2.minCoeff();

  SplitMix64 rng(derive_seed(seed, 2));
  Eigen::RowVectorXd saved_i(n);
  Eigen::RowVectorXd saved_j(n);
  for (int t = 0; t < iters; ++t) {
    const int c = static_cast<int>(rng.next() % static_cast<std::uint64_t>(d));
    const int i = static_cast<int>(rng.next() % static_cast<std::uint64_t>(n));
    const int j = static_cast<int>(rng.next() % static_cast<std::uint64_t>(n));
    if (i == j) continue;

    const double xi = X(i, c);
    const double xj = X(j, c);
    saved_i = D2.row(i);
    saved_j = D2.row(j);
    for (int r = 0; r < n; ++r) {
      if (r == i || r == j) continue;
      const double xr = X(r, c);
      const double di = std::max(D2(i, r) - (xi - xr) * (xi - xr) + (xj - xr) * (xj - xr), 0.0);
      const double dj = std::max(D2(j, r) - (xj - xr) * (xj - xr) + (xi - xr) * (xi - xr), 0.0);
      D2(i, r) = D2(r, i) = di;
      D2(j, r) = D2(r, j) = dj;
    }
    const double new_min = D2.minCoeff();
    if (new_min > current_min) {
      X(i, c) = xj;
      X(j, c) = xi;
      current_min = new_min;
    } else {
      D2.row(i) = saved_i;
      D2.row(j) = saved_j;
      D2.col(i) = saved_i.transpose();
      D2.col(j) = saved_j.transpose();
    }
  }
  return X;
}

Design maximin_lhs(const TestFunction& fn, int n, int iters, std::uint64_t seed) {
  const MatrixXd U = maximin_lhs_unit(n, fn.dim, iters, seed);
  Design design;
  design.kind = DesignKind::kMaximinLhs;
  design.points.resize(n, fn.dim);
  const VectorXd lo = fn.bounds.col(0);
  const VectorXd width = fn.bounds.col(1) - fn.bounds.col(0);
  for (int i = 0; i < n; ++i) {
    design.points.row(i) = (lo + U.row(i).transpose().cwiseProduct(width)).transpose();
  }
  return design;
}

}  // namespace bobench
