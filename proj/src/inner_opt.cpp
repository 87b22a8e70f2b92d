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

#include "bobench/inner_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "bobench/rng.hpp"

namespace bobench {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

VectorXd clamp_unit(VectorXd x) {
  return x.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

MatrixXd lhs_unit(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("lhs_unit: n and d must be positive");
  SplitMix64 rng(seed);
  MatrixXd X(n, d);
  std::vector<int> perm(n);
  for (int j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      const int k = static_cast<int>(rng.next() % static_cast<std::uint64_t>(i + 1));
      std::swap(perm[i], perm[k]);
    }
    for (int i = 0; i < n; ++i) {
      X(i, j) = (perm[i] + rng.uniform()) / n;
    }
  }
  return X;
}

OptResult local_refine(const Objective& f, const VectorXd& x0, int max_iters,
                       double tol) {
  const int D = static_cast<int>(x0.size());
  if (D < 1) throw std::invalid_argument("local_refine: empty start point");
  if (max_iters < 1 || tol <= 0.0) {
    throw std::invalid_argument("local_refine: bad budget");
  }

  auto value = [&](const VectorXd& x) {
    const double v = f(x);
    return std::isnan(v) ? kNegInf : v;
  };

  VectorXd best_x = clamp_unit(x0);
  double best_f = value(best_x);
  auto track = [&](const VectorXd& x, double v) {
    if (v > best_f) {
      best_f = v;
      best_x = x;
    }
  };

  std::vector<VectorXd> verts(D + 1);
  std::vector<double> vals(D + 1);
  verts[0] = clamp_unit(x0);
  vals[0] = best_f;
  for (int i = 1; i <= D; ++i) {
    VectorXd v = verts[0];
    const double step = (v(i - 1) + 0.05 <= 1.0) ? 0.05 : -0.05;
    v(i - 1) += step;
    verts[i] = clamp_unit(v);
    vals[i] = value(verts[i]);
    track(verts[i], vals[i]);
  }

  std::vector<int> order(D + 1);
  for (int iter = 0; iter < max_iters; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return vals[a] > vals[b]; });
    const int ib = order[0];
    const int iw = order[D];
    const int is = order[D - 1];
    if (std::isfinite(vals[ib]) && std::isfinite(vals[iw]) &&
        vals[ib] - vals[iw] < tol) {
      break;
    }
    if (vals[ib] == kNegInf) break;

    VectorXd centroid = VectorXd::Zero(D);
    for (int i = 0; i <= D; ++i) {
      if (i != iw) centroid += verts[i];
    }
    centroid /= D;

    const VectorXd xr = clamp_unit(centroid + (centroid - verts[iw]));
    const double fr = value(xr);
    track(xr, fr);

    if (fr > vals[ib]) {
      const VectorXd xe = clamp_unit(centroid + 2.0 * (centroid - verts[iw]));
      const double fe = value(xe);
      track(xe, fe);
      if (fe > fr) {
        verts[iw] = xe;
        vals[iw] = fe;
      } else {
        verts[iw] = xr;
        vals[iw] = fr;
      }
    } else if (fr > vals[is]) {
      verts[iw] = xr;
      vals[iw] = fr;
    } else {
      bool shrink = false;
      if (fr > vals[iw]) {
        const VectorXd xc = clamp_unit(centroid + 0.5 * (xr - centroid));
        const double fc = value(xc);
        track(xc, fc);
        if (fc >= fr) {
          verts[iw] = xc;
          vals[iw] = fc;
        } else {
          shrink = true;
        }
      } else {
        const VectorXd xc = clamp_unit(centroid + 0.5 * (verts[iw] - centroid));
        const double fc = value(xc);
        track(xc, fc);
        if (fc > vals[iw]) {
          verts[iw] = xc;
          vals[iw] = fc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (int i = 0; i <= D; ++i) {
          if (i == ib) continue;
          verts[i] = clamp_unit(verts[ib] + 0.5 * (verts[i] - verts[ib]));
          vals[i] = value(verts[i]);
          track(verts[i], vals[i]);
        }
      }
    }
  }

  OptResult res;
  res.x = best_x;
  res.value = (best_f == kNegInf)
                  ? std::numeric_limits<double>::quiet_NaN()
                  : best_f;
  return res;
}

OptResult maximize(const Objective& f, int dim, const OptBudget& budget) {
  if (dim < 1) throw std::invalid_argument("maximize: dimension must be positive");
  if (budget.restarts < 1 || budget.local_iters < 1 || budget.tol <= 0.0) {
    throw std::invalid_argument("maximize: bad budget");
  }

  bool found = false;
  VectorXd best_x;
  double best_f = kNegInf;
  auto track = [&](const VectorXd& x, double v) {
    if (std::isnan(v)) return;
    if (!found || v > best_f) {
      found = true;
      best_f = v;
      best_x = x;
    }
  };

  const MatrixXd probes = lhs_unit(100 * dim, dim, derive_seed(budget.seed, 1));
  bool have_probe = false;
  VectorXd best_probe;
  double best_probe_f = kNegInf;
  for (int i = 0; i < probes.rows(); ++i) {
    const VectorXd x = probes.row(i).transpose();
    const double v = f(x);
    if (std::isnan(v)) continue;
    track(x, v);
    if (!have_probe || v > best_probe_f) {
      have_probe = true;
      best_probe_f = v;
      best_probe = x;
    }
  }

  const MatrixXd starts = lhs_unit(budget.restarts, dim, derive_seed(budget.seed, 2));
  std::vector<VectorXd> start_points;
  start_points.reserve(budget.restarts + 1);
  for (int i = 0; i < starts.rows(); ++i) {
    start_points.push_back(starts.row(i).transpose());
  }
  if (have_probe) start_points.push_back(best_probe);

  for (const VectorXd& s : start_points) {
    const OptResult r = local_refine(f, s, budget.local_iters, budget.tol);
    if (!std::isnan(r.value)) track(r.x, r.value);
  }

  if (!found) throw OptimizationError("maximize: objective was NaN at every candidate");
  return {best_x, best_f};
}

}  // namespace bobench
