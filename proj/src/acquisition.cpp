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

#include "bobench/acquisition.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bobench/math.hpp"

namespace bobench {

void AcqSpec::validate() const {
  if (beta_mode == BetaMode::kFixed && !(beta >= 0.0)) {
    throw std::invalid_argument("AcqSpec: fixed beta must be >= 0");
  }
  if (beta_mode == BetaMode::kVariable && !(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("AcqSpec: delta must lie in (0,1)");
  }
  if (mc_samples < 1) throw std::invalid_argument("AcqSpec: mc_samples must be >= 1");
  if (!(temperature > 0.0)) throw std::invalid_argument("AcqSpec: temperature must be > 0");
  if (!(hedge_eta > 0.0)) throw std::invalid_argument("AcqSpec: hedge_eta must be > 0");
  if (batch_size < 1) throw std::invalid_argument("AcqSpec: batch_size must be >= 1");
  if (batch_size > 1 && batch_mode == BatchMode::kSingle &&
      family != AcqFamily::kClMin && family != AcqFamily::kClMax &&
      family != AcqFamily::kGpBucb) {
    throw std::invalid_argument(
        "AcqSpec: batch_size > 1 needs a joint or sequential batch mode");
  }
}

double AcqSpec::resolve_beta(int round, int dim) const {
  if (beta_mode == BetaMode::kFixed) return beta;
  return gp_ucb_beta(round, dim, delta);
}

std::string AcqSpec::name() const {
  std::ostringstream out;
  auto beta_suffix = [&]() -> std::string {
    if (beta_mode == BetaMode::kVariable) return "-var";
    std::ostringstream b;
    b << "-b" << beta;
    return b.str();
  };
  switch (family) {
    case AcqFamily::kPi: out << "pi"; break;
    case AcqFamily::kEi: out << "ei"; break;
    case AcqFamily::kUcb: out << "ucb" << beta_suffix(); break;
    case AcqFamily::kHedge: out << "hedge"; break;
    case AcqFamily::kMcPi: out << "mc-pi"; break;
    case AcqFamily::kMcEi: out << "mc-ei"; break;
    case AcqFamily::kMcUcb: out << "mc-ucb" << beta_suffix(); break;
    case AcqFamily::kMes: out << "mes"; break;
    case AcqFamily::kClMin: out << "cl-min"; break;
    case AcqFamily::kClMax: out << "cl-max"; break;
    case AcqFamily::kGpBucb: out << "gp-bucb" << beta_suffix(); break;
  }
  if (batch_size > 1) {
    out << "-q" << batch_size;
    if (batch_mode == BatchMode::kJoint) out << "-joint";
    if (batch_mode == BatchMode::kSequential) out << "-seq";
  }
  return out.str();
}

double pi(double mu, double sigma, double y_best) {
  if (sigma < 0.0) throw std::invalid_argument("pi: sigma must be >= 0");
  const double z = mu - y_best;
  if (sigma == 0.0) return z > 0.0 ? 1.0 : 0.0;
  return normal_cdf(z / sigma);
}

double ei(double mu, double sigma, double y_best) {
  if (sigma < 0.0) throw std::invalid_argument("ei: sigma must be >= 0");
  const double z = mu - y_best;
  if (sigma == 0.0) return std::max(z, 0.0);
  const double u = z / sigma;
  return std::max(z * normal_cdf(u) + sigma * normal_pdf(u), 0.0);
}

double ucb(double mu, double sigma, double beta) {
  if (sigma < 0.0) throw std::invalid_argument("ucb: sigma must be >= 0");
  if (beta < 0.0) throw std::invalid_argument("ucb: beta must be >= 0");
  return mu + std::sqrt(beta) * sigma;
}

double log_pi(double mu, double sigma, double y_best) {
  if (sigma < 0.0) throw std::invalid_argument("pi: sigma must be >= 0");
  const double z = mu - y_best;
  if (sigma == 0.0) {
    return z > 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  return normal_logcdf(z / sigma);
}

double log_ei(double mu, double sigma, double y_best) {
  if (sigma < 0.0) throw std::invalid_argument("ei: sigma must be >= 0");
  const double z = mu - y_best;
  if (sigma == 0.0) {
    return z > 0.0 ? std::log(z) : -std::numeric_limits<double>::infinity();
  }
  const double u = z / sigma;
  if (u > -1.0) return std::log(ei(mu, sigma, y_best));
  // u*Phi(u) + phi(u) factored as phi(u) * (1 + u/hazard(u)); both factors
  // stay representable arbitrarily far into the left tail.
  const double log_pdf =
      -0.5 * u * u - 0.5 * std::log(2.0 * std::numbers::pi);
  return std::log(sigma) + log_pdf + std::log1p(u / normal_hazard(u));
}

double gp_ucb_beta(int n, int dim, double delta) {
  if (n < 1 || dim < 1) throw std::invalid_argument("gp_ucb_beta: n and dim must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("gp_ucb_beta: delta must lie in (0,1]");
  }
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return 2.0 * std::log(dim * static_cast<double>(n) * n * pi2 / (6.0 * delta));
}

std::array<double, 3> hedge_probabilities(const HedgeState& state, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("hedge: eta must be > 0");
  const double gmax = std::max({state.gains[0], state.gains[1], state.gains[2]});
  std::array<double, 3> p{};
  double total = 0.0;
  for (int i = 0; i < HedgeState::kMembers; ++i) {
    p[i] = std::exp(eta * (state.gains[i] - gmax));
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

int hedge_select(const HedgeState& state, double eta, double u) {
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("hedge_select: u must lie in [0,1)");
  const std::array<double, 3> p = hedge_probabilities(state, eta);
  double cum = 0.0;
  for (int i = 0; i < HedgeState::kMembers; ++i) {
    cum += p[i];
    if (u < cum) return i;
  }
  return HedgeState::kMembers - 1;
}

HedgeState hedge_update(const HedgeState& state,
                        const std::array<double, 3>& rewards) {
  HedgeState next = state;
  for (int i = 0; i < HedgeState::kMembers; ++i) {
    if (!std::isfinite(rewards[i])) {
      throw std::invalid_argument("hedge_update: rewards must be finite");
    }
    next.gains[i] += rewards[i];
  }
  next.round += 1;
  return next;
}

}  // namespace bobench
