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

#include "bobench/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>
#include <utility>

#include "bobench/gp.hpp"
#include "bobench/inner_opt.hpp"
#include "bobench/math.hpp"
#include "bobench/mc_acquisition.hpp"
#include "bobench/rng.hpp"

namespace bobench {
namespace {

namespace fs = std::filesystem;

constexpr int kMesGridSize = 1000;
constexpr int kMesMaxValues = 10;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

VectorXd unit_to_raw(const VectorXd& u, const MatrixXd& bounds) {
  VectorXd x(u.size());
  for (int j = 0; j < u.size(); ++j) {
    const double lo = bounds(j, 0);
    const double hi = bounds(j, 1);
    x[j] = std::min(hi, std::max(lo, lo + u[j] * (hi - lo)));
  }
  return x;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& s, const std::string& path, int line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw StateError("bad numeric field '" + s + "' at " + path + ":" +
                     std::to_string(line_no));
  }
  return v;
}

int parse_int(const std::string& s, const std::string& path, int line_no) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') {
    throw StateError("bad integer field '" + s + "' at " + path + ":" +
                     std::to_string(line_no));
  }
  return static_cast<int>(v);
}

}  // namespace

void atomic_write_file(const std::string& path, const std::string& contents) {
  static std::atomic<unsigned> counter{0};
  fs::path tmp(path);
  tmp += ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StateError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw StateError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

MatrixXd propose_points(const Dataset& data, const KernelParams& params,
                        const AcqSpec& spec, int round, std::uint64_t acq_seed) {
  const int d = data.dim();
  switch (spec.family) {
    case AcqFamily::kPi:
    case AcqFamily::kEi:
    case AcqFamily::kUcb: {
      const GpPredictor model(data, params);
      int incumbent = 0;
      const double y_best = data.outputs_std().maxCoeff(&incumbent);
      const double beta =
          spec.family == AcqFamily::kUcb ? spec.resolve_beta(round, d) : 0.0;
      const AcqFamily fam = spec.family;
      const Objective surface = [&model, fam, y_best, beta](const VectorXd& x) {
        double mu = 0.0, var = 0.0;
        model.mean_var(x, mu, var);
        const double sigma = std::sqrt(var);
        if (fam == AcqFamily::kPi) return pi(mu, sigma, y_best);
        if (fam == AcqFamily::kEi) return ei(mu, sigma, y_best);
        return ucb(mu, sigma, beta);
      };
      OptBudget budget;
      budget.seed = acq_seed;
      OptResult r = maximize(surface, d, budget);
      // Extra local ascent from the incumbent. A confident surrogate leaves
      // improvement acquisitions positive only in a small pocket around the
      // best observed point; space-filling starts almost never land inside
      // it, and without this start the proposal degenerates to noise there.
      const OptResult anchored =
          local_refine(surface, data.inputs().row(incumbent).transpose(),
                       budget.local_iters, budget.tol);
      if (!std::isnan(anchored.value) && anchored.value > r.value) r = anchored;
      return r.x.transpose();
    }
    case AcqFamily::kMcPi:
    case AcqFamily::kMcEi:
    case AcqFamily::kMcUcb: {
      const BatchProposal bp =
          spec.batch_mode == BatchMode::kSequential
              ? propose_mc_sequential(data, params, spec, round, acq_seed)
              : propose_mc_joint(data, params, spec, round, acq_seed);
      return bp.points;
    }
    case AcqFamily::kMes: {
      const MatrixXd grid = lhs_unit(kMesGridSize, d, derive_seed(acq_seed, 1));
      SplitMix64 eng(derive_seed(acq_seed, 2));
      VectorXd u(kMesMaxValues);
      for (int i = 0; i < u.size(); ++i) u[i] = eng.uniform_open();
      const MaxValueSamples mvs =
          sample_max_values(data, params, grid, kMesMaxValues, u);
      const GpPredictor model(data, params);
      const Objective surface = [&model, &mvs](const VectorXd& x) {
        double mu = 0.0, var = 0.0;
        model.mean_var(x, mu, var);
        return mes(mu, std::sqrt(var), mvs);
      };
      OptBudget budget;
      budget.seed = derive_seed(acq_seed, 3);
      return maximize(surface, d, budget).x.transpose();
    }
    case AcqFamily::kClMin:
      return propose_constant_liar(data, params, spec, LieMode::kMin, acq_seed)
          .points;
    case AcqFamily::kClMax:
      return propose_constant_liar(data, params, spec, LieMode::kMax, acq_seed)
          .points;
    case AcqFamily::kGpBucb:
      return propose_gp_bucb(data, params, spec, round, acq_seed).points;
    case AcqFamily::kHedge:
      break;
  }
  throw std::logic_error("unhandled acquisition family");
}

void ExperimentConfig::validate() const {
  if (function_id.empty()) throw std::invalid_argument("function_id is empty");
  if (init_per_dim < 1) {
    throw std::invalid_argument("init_per_dim must be at least 1");
  }
  if (budget < 1) throw std::invalid_argument("budget must be at least 1");
  if (replications < 1) {
    throw std::invalid_argument("replications must be at least 1");
  }
  if (f_ref_samples < 10000) {
    throw std::invalid_argument("f_ref_samples must be at least 10000");
  }
  if (design_iters < 0) {
    throw std::invalid_argument("design_iters must be non-negative");
  }
}

int ExperimentConfig::init_count() const {
  return init_per_dim * registry(function_id).dim;
}

double normalized_score(double best_so_far, const TestFunction& fn,
                        double f_ref) {
  if (!(f_ref > fn.f_opt)) {
    throw std::invalid_argument(
        "reference mean must exceed the optimum of " + fn.id);
  }
  const double s = (f_ref - best_so_far) / (f_ref - fn.f_opt);
  return std::min(1.0, std::max(0.0, s));
}

double compute_f_ref(const TestFunction& fn, int sample_count,
                     std::uint64_t seed) {
  if (sample_count < 10000) {
    throw std::invalid_argument(
        "reference mean needs at least 10000 samples to be stable");
  }
  const MatrixXd U = lhs_unit(sample_count, fn.dim, seed);
  double acc = 0.0;
  for (int i = 0; i < U.rows(); ++i) {
    acc += evaluate(fn, unit_to_raw(U.row(i).transpose(), fn.bounds));
  }
  return acc / static_cast<double>(sample_count);
}

double compute_f_ref_cached(const TestFunction& fn, int sample_count,
                            std::uint64_t seed, const std::string& output_dir) {
  if (output_dir.empty()) return compute_f_ref(fn, sample_count, seed);
  static std::mutex cache_mutex;
  const std::lock_guard<std::mutex> lock(cache_mutex);

  fs::create_directories(output_dir);
  const fs::path cache = fs::path(output_dir) / "f_ref_cache.json";
  nlohmann::json j = nlohmann::json::object();
  if (fs::exists(cache)) {
    std::ifstream in(cache);
    try {
      in >> j;
    } catch (const nlohmann::json::exception&) {
      j = nlohmann::json::object();
    }
    if (!j.is_object()) j = nlohmann::json::object();
  }
  if (j.contains(fn.id)) {
    const auto& e = j[fn.id];
    if (e.is_object() && e.value("samples", -1) == sample_count &&
        e.value("seed", std::uint64_t{0}) == seed && e.contains("value")) {
      return e["value"].get<double>();
    }
  }
  const double value = compute_f_ref(fn, sample_count, seed);
  j[fn.id] = {{"samples", sample_count}, {"seed", seed}, {"value", value}};
  atomic_write_file(cache.string(), j.dump(2) + "\n");
  return value;
}

double auc(const Trace& trace, int init_count) {
  const int total = static_cast<int>(trace.records.size());
  if (init_count < 0 || total <= init_count) {
    throw std::invalid_argument(
        "trace has no evaluations past the initial design");
  }
  double acc = 0.0;
  for (int i = init_count; i < total; ++i) {
    acc += trace.records[i].normalized_score;
  }
  return acc / static_cast<double>(total - init_count);
}

FriedmanResult friedman_test(const MatrixXd& best_values) {
  const int n = static_cast<int>(best_values.rows());
  const int k = static_cast<int>(best_values.cols());
  if (n < 1 || k < 2) {
    throw std::invalid_argument(
        "Friedman test needs at least one block and two methods");
  }
  if (!best_values.allFinite()) {
    throw std::invalid_argument("Friedman test input has non-finite entries");
  }

  VectorXd rank_sums = VectorXd::Zero(k);
  std::vector<int> order(k);
  for (int i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return best_values(i, a) < best_values(i, b);
    });
    int p = 0;
    while (p < k) {
      int q = p;
      while (q + 1 < k &&
             best_values(i, order[q + 1]) == best_values(i, order[p])) {
        ++q;
      }
      const double r = 0.5 * static_cast<double>(p + q) + 1.0;
      for (int t = p; t <= q; ++t) rank_sums[order[t]] += r;
      p = q + 1;
    }
  }

  const double nk = static_cast<double>(n) * k * (k + 1);
  const double stat_raw =
      12.0 / nk * rank_sums.squaredNorm() - 3.0 * n * (k + 1);
  FriedmanResult res;
  res.statistic = std::max(0.0, stat_raw);
  res.p_value = chi_square_sf(res.statistic, k - 1);
  if (res.p_value < 1e-300) {
    res.p_value = 0.0;
    res.p_underflow = true;
  }
  return res;
}

StudyResult aggregate(const std::vector<std::vector<Trace>>& per_method_traces,
                      int init_count) {
  if (per_method_traces.empty()) {
    throw std::invalid_argument("nothing to aggregate");
  }
  const int n_methods = static_cast<int>(per_method_traces.size());
  const int reps = static_cast<int>(per_method_traces[0].size());
  StudyResult out;
  out.methods.reserve(n_methods);

  for (const auto& traces : per_method_traces) {
    if (static_cast<int>(traces.size()) != reps || traces.empty()) {
      throw std::invalid_argument("replication counts differ between methods");
    }
    const std::size_t T = traces[0].records.size();
    MethodSummary s;
    s.method = traces[0].method;
    for (const Trace& t : traces) {
      if (t.records.size() != T || t.method != s.method) {
        throw std::invalid_argument(
            "traces of one method must share length and name");
      }
    }
    s.mean_trace.resize(static_cast<int>(T));
    s.ci_lower.resize(static_cast<int>(T));
    s.ci_upper.resize(static_cast<int>(T));
    std::vector<double> column(reps);
    for (std::size_t t = 0; t < T; ++t) {
      for (int r = 0; r < reps; ++r) {
        column[r] = traces[r].records[t].normalized_score;
      }
      const double m = mean_of(column);
      const double half =
          1.96 * sample_sd(column, m) / std::sqrt(static_cast<double>(reps));
      s.mean_trace[static_cast<int>(t)] = m;
      s.ci_lower[static_cast<int>(t)] = m - half;
      s.ci_upper[static_cast<int>(t)] = m + half;
    }
    for (const Trace& t : traces) {
      s.final_bests.push_back(t.records.back().best_so_far);
      s.final_scores.push_back(t.records.back().normalized_score);
    }
    if (static_cast<int>(T) > init_count) {
      for (const Trace& t : traces) s.auc_values.push_back(auc(t, init_count));
      s.auc_mean = mean_of(s.auc_values);
      s.auc_se = sample_sd(s.auc_values, s.auc_mean) /
                 std::sqrt(static_cast<double>(reps));
    } else {
      s.auc_mean = std::numeric_limits<double>::quiet_NaN();
      s.auc_se = std::numeric_limits<double>::quiet_NaN();
    }
    out.methods.push_back(std::move(s));
  }

  if (n_methods >= 2) {
    MatrixXd B(reps, n_methods);
    for (int m = 0; m < n_methods; ++m) {
      for (int r = 0; r < reps; ++r) B(r, m) = out.methods[m].final_bests[r];
    }
    out.friedman = friedman_test(B);
  }
  return out;
}

Trace run_bo(const ExperimentConfig& cfg, int replication) {
  cfg.validate();
  cfg.acq.validate();
  if (replication < 0 || replication >= cfg.replications) {
    throw std::invalid_argument("replication index out of range");
  }
  const TestFunction& fn = registry(cfg.function_id);
  const int d = fn.dim;
  const int n0 = cfg.init_per_dim * d;
  if (cfg.budget < n0) {
    throw std::invalid_argument(
        "budget must cover the initial design (" + std::to_string(n0) +
        " points)");
  }

  const double f_ref =
      cfg.output_dir.empty()
          ? compute_f_ref(fn, cfg.f_ref_samples, kReferenceSeed)
          : compute_f_ref_cached(fn, cfg.f_ref_samples, kReferenceSeed,
                                 cfg.output_dir);

  const std::uint64_t design_seed =
      derive_seed(cfg.master_seed, seed_stream::kDesign, replication);
  const std::uint64_t noise_base =
      derive_seed(cfg.master_seed, seed_stream::kNoise, replication);
  const std::uint64_t method_seed =
      derive_seed(cfg.master_seed, seed_stream::kMethod, replication);

  const auto t_start = std::chrono::steady_clock::now();

  Trace trace;
  trace.method = cfg.acq.name();
  trace.replication = replication;
  trace.records.reserve(cfg.budget);

  double best = std::numeric_limits<double>::infinity();
  const auto observe = [&](const VectorXd& x_unit, int eval_index,
                           bool init_phase) {
    const VectorXd x_raw = unit_to_raw(x_unit, fn.bounds);
    const double y_clean = evaluate(fn, x_raw);
    double y_obs = y_clean;
    if (fn.noise_std > 0.0) {
      SplitMix64 eng(
          derive_seed(noise_base, seed_stream::kEvalNoise, eval_index));
      y_obs += fn.noise_std * eng.normal();
    }
    best = std::min(best, y_clean);
    EvalRecord rec;
    rec.eval_index = eval_index;
    rec.init_phase = init_phase;
    rec.x_raw = x_raw;
    rec.y = y_clean;
    rec.best_so_far = best;
    rec.normalized_score = normalized_score(best, fn, f_ref);
    trace.records.push_back(std::move(rec));
    return y_obs;
  };

  const MatrixXd design = maximin_lhs_unit(n0, d, cfg.design_iters, design_seed);
  MatrixXd X_raw(n0, d);
  VectorXd y_gp(n0);
  for (int i = 0; i < n0; ++i) {
    const double y_obs = observe(design.row(i).transpose(), i, true);
    X_raw.row(i) = trace.records.back().x_raw.transpose();
    y_gp[i] = -y_obs;  // the surrogate maximizes
  }
  Dataset data = Dataset::from_raw(X_raw, y_gp, fn.bounds);

  if (cfg.budget > n0) {
    KernelParams params;
    int consecutive_failures = 0;
    try {
      FitConfig fit_cfg;
      fit_cfg.seed = derive_seed(method_seed, seed_stream::kFit, 0);
      params = fit_gp_mle(data, fit_cfg);
    } catch (const FitError& e) {
      params = heuristic_params(d);
      consecutive_failures = 1;
      std::fprintf(stderr,
                   "[bobench] warning: %s rep %d: initial fit failed (%s); "
                   "keeping heuristic hyperparameters\n",
                   trace.method.c_str(), replication, e.what());
    }

    HedgeState hedge;
    int round = 0;
    int eval_index = n0;
    const auto refit = [&](int at_round) {
      try {
        params = refit_gp_mle(
            data, params, derive_seed(method_seed, seed_stream::kFit, at_round));
        consecutive_failures = 0;
      } catch (const FitError& e) {
        ++consecutive_failures;
        std::fprintf(stderr,
                     "[bobench] warning: %s rep %d round %d: refit failed "
                     "(%s); keeping previous hyperparameters\n",
                     trace.method.c_str(), replication, at_round, e.what());
        if (consecutive_failures > 3) {
          throw NumericalError(
              "aborting " + trace.method + " replication " +
              std::to_string(replication) + " on " + fn.id + ": " +
              std::to_string(consecutive_failures) +
              " consecutive surrogate fit failures");
        }
      }
    };

    while (eval_index < cfg.budget) {
      ++round;
      const std::uint64_t acq_seed =
          derive_seed(method_seed, seed_stream::kAcquisition, round);

      if (cfg.acq.family == AcqFamily::kHedge) {
        const GpPredictor model(data, params);
        int incumbent = 0;
        const double y_best = data.outputs_std().maxCoeff(&incumbent);
        const double beta_h = gp_ucb_beta(round, d, cfg.acq.delta);
        MatrixXd proposals(HedgeState::kMembers, d);
        for (int a = 0; a < HedgeState::kMembers; ++a) {
          const Objective surface = [&model, a, y_best,
                                     beta_h](const VectorXd& x) {
            double mu = 0.0, var = 0.0;
            model.mean_var(x, mu, var);
            const double sigma = std::sqrt(var);
            if (a == 0) return pi(mu, sigma, y_best);
            if (a == 1) return ei(mu, sigma, y_best);
            return ucb(mu, sigma, beta_h);
          };
          OptBudget budget;
          budget.seed = derive_seed(acq_seed, a + 1);
          OptResult best_a = maximize(surface, d, budget);
          const OptResult anchored = local_refine(
              surface, data.inputs().row(incumbent).transpose(),
              budget.local_iters, budget.tol);
          if (!std::isnan(anchored.value) && anchored.value > best_a.value) {
            best_a = anchored;
          }
          proposals.row(a) = best_a.x.transpose();
        }
        hedge.pending_proposals = proposals;
        SplitMix64 pick(
            derive_seed(method_seed, seed_stream::kIteration, round));
        const int chosen = hedge_select(hedge, cfg.acq.hedge_eta, pick.uniform());
        const double y_obs =
            observe(proposals.row(chosen).transpose(), eval_index, false);
        data.append_unit(proposals.row(chosen).transpose(), -y_obs);
        ++eval_index;

        refit(round);
        const GpPredictor post(data, params);
        std::array<double, 3> rewards{};
        for (int a = 0; a < HedgeState::kMembers; ++a) {
          rewards[a] = post.mean(proposals.row(a).transpose());
        }
        hedge = hedge_update(hedge, rewards);
        continue;
      }

      const MatrixXd points =
          propose_points(data, params, cfg.acq, round, acq_seed);
      const int take =
          std::min(static_cast<int>(points.rows()), cfg.budget - eval_index);
      for (int r = 0; r < take; ++r) {
        const VectorXd u = points.row(r).transpose();
        const double y_obs = observe(u, eval_index, false);
        data.append_unit(u, -y_obs);
        ++eval_index;
      }
      if (eval_index >= cfg.budget) break;  // final refit would go unused
      refit(round);
    }
  }

  trace.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return trace;
}

Trace run_baseline_lhs(const ExperimentConfig& cfg, int replication) {
  cfg.validate();
  if (replication < 0 || replication >= cfg.replications) {
    throw std::invalid_argument("replication index out of range");
  }
  const TestFunction& fn = registry(cfg.function_id);
  const int d = fn.dim;
  const int n0 = cfg.init_per_dim * d;
  if (cfg.budget < n0) {
    throw std::invalid_argument(
        "budget must cover the initial design (" + std::to_string(n0) +
        " points)");
  }
  const double f_ref =
      cfg.output_dir.empty()
          ? compute_f_ref(fn, cfg.f_ref_samples, kReferenceSeed)
          : compute_f_ref_cached(fn, cfg.f_ref_samples, kReferenceSeed,
                                 cfg.output_dir);
  const std::uint64_t design_seed =
      derive_seed(cfg.master_seed, seed_stream::kDesign, replication);
  const std::uint64_t noise_base =
      derive_seed(cfg.master_seed, seed_stream::kNoise, replication);

  const auto t_start = std::chrono::steady_clock::now();
  Trace trace;
  trace.method = "lhs";
  trace.replication = replication;
  trace.records.reserve(cfg.budget);

  const MatrixXd design =
      maximin_lhs_unit(cfg.budget, d, cfg.design_iters, design_seed);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cfg.budget; ++i) {
    const VectorXd x_raw = unit_to_raw(design.row(i).transpose(), fn.bounds);
    const double y_clean = evaluate(fn, x_raw);
    if (fn.noise_std > 0.0) {
      // Burn the same noise stream as the optimizing methods so eval budgets
      // stay comparable, even though the clean value drives the trace.
      SplitMix64 eng(derive_seed(noise_base, seed_stream::kEvalNoise, i));
      (void)eng.normal();
    }
    best = std::min(best, y_clean);
    EvalRecord rec;
    rec.eval_index = i;
    rec.init_phase = i < n0;
    rec.x_raw = x_raw;
    rec.y = y_clean;
    rec.best_so_far = best;
    rec.normalized_score = normalized_score(best, fn, f_ref);
    trace.records.push_back(std::move(rec));
  }
  trace.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return trace;
}

void write_traces_csv(const std::string& path,
                      const std::vector<Trace>& traces) {
  if (traces.empty() || traces[0].records.empty()) {
    throw std::invalid_argument("no trace data to write");
  }
  const int d = static_cast<int>(traces[0].records[0].x_raw.size());
  std::string out;
  out.reserve(64 * traces.size() * traces[0].records.size());
  out += "method,replication,eval_index,phase";
  for (int j = 0; j < d; ++j) {
    out += ",x_";
    out += std::to_string(j);
  }
  out += ",y,best_so_far,normalized_score\n";
  for (const Trace& t : traces) {
    for (const EvalRecord& r : t.records) {
      if (static_cast<int>(r.x_raw.size()) != d) {
        throw std::invalid_argument("inconsistent input dimension in traces");
      }
      out += t.method;
      out += ',';
      out += std::to_string(t.replication);
      out += ',';
      out += std::to_string(r.eval_index);
      out += ',';
      out += r.init_phase ? "init" : "bo";
      for (int j = 0; j < d; ++j) {
        out += ',';
        out += g17(r.x_raw[j]);
      }
      out += ',';
      out += g17(r.y);
      out += ',';
      out += g17(r.best_so_far);
      out += ',';
      out += g17(r.normalized_score);
      out += '\n';
    }
  }
  atomic_write_file(path, out);
}

std::vector<Trace> read_traces_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StateError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw StateError("empty results file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_fields(line);
  if (header.size() < 8 || header[0] != "method" ||
      header[1] != "replication" || header[2] != "eval_index" ||
      header[3] != "phase" || header[header.size() - 3] != "y" ||
      header[header.size() - 2] != "best_so_far" ||
      header[header.size() - 1] != "normalized_score") {
    throw StateError("unrecognized results header in " + path);
  }
  const int d = static_cast<int>(header.size()) - 7;
  for (int j = 0; j < d; ++j) {
    if (header[4 + j] != "x_" + std::to_string(j)) {
      throw StateError("unrecognized results header in " + path);
    }
  }

  std::vector<Trace> traces;
  std::map<std::pair<std::string, int>, std::size_t> index;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != header.size()) {
      throw StateError("wrong field count at " + path + ":" +
                       std::to_string(line_no));
    }
    EvalRecord rec;
    rec.eval_index = parse_int(f[2], path, line_no);
    if (f[3] == "init") {
      rec.init_phase = true;
    } else if (f[3] == "bo") {
      rec.init_phase = false;
    } else {
      throw StateError("unknown phase '" + f[3] + "' at " + path + ":" +
                       std::to_string(line_no));
    }
    rec.x_raw.resize(d);
    for (int j = 0; j < d; ++j) rec.x_raw[j] = parse_double(f[4 + j], path, line_no);
    rec.y = parse_double(f[4 + d], path, line_no);
    rec.best_so_far = parse_double(f[5 + d], path, line_no);
    rec.normalized_score = parse_double(f[6 + d], path, line_no);

    const std::pair<std::string, int> key{f[0], parse_int(f[1], path, line_no)};
    auto it = index.find(key);
    if (it == index.end()) {
      Trace t;
      t.method = key.first;
      t.replication = key.second;
      traces.push_back(std::move(t));
      it = index.emplace(key, traces.size() - 1).first;
    }
    traces[it->second].records.push_back(std::move(rec));
  }
  return traces;
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BOBENCH_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

void parallel_for(int count, int threads, const std::function<void(int)>& task) {
  if (count <= 0) return;
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        {
          const std::lock_guard<std::mutex> lock(err_mutex);
          if (first_error) return;
        }
        try {
          task(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<Trace> run_replications(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  cfg.acq.validate();
  if (!cfg.output_dir.empty()) {
    compute_f_ref_cached(registry(cfg.function_id), cfg.f_ref_samples,
                         kReferenceSeed, cfg.output_dir);
  }
  std::vector<Trace> traces(cfg.replications);
  parallel_for(cfg.replications, resolve_thread_count(threads),
               [&](int r) { traces[r] = run_bo(cfg, r); });
  return traces;
}

StudyResult run_study(const StudySpec& spec, int threads) {
  spec.base.validate();
  if (spec.methods.empty() && !spec.include_baseline) {
    throw std::invalid_argument("study has no methods");
  }
  const TestFunction& fn = registry(spec.base.function_id);
  const int n0 = spec.base.init_per_dim * fn.dim;

  std::vector<ExperimentConfig> configs;
  std::vector<std::string> names;
  for (const AcqSpec& m : spec.methods) {
    m.validate();
    ExperimentConfig cfg = spec.base;
    cfg.acq = m;
    names.push_back(m.name());
    configs.push_back(std::move(cfg));
  }
  if (spec.include_baseline) names.push_back("lhs");
  {
    std::set<std::string> uniq(names.begin(), names.end());
    if (uniq.size() != names.size()) {
      throw std::invalid_argument("duplicate method names in study");
    }
  }

  if (!spec.base.output_dir.empty()) {
    compute_f_ref_cached(fn, spec.base.f_ref_samples, kReferenceSeed,
                         spec.base.output_dir);
  }

  const int n_methods = static_cast<int>(names.size());
  const int reps = spec.base.replications;
  std::vector<std::vector<Trace>> traces(n_methods, std::vector<Trace>(reps));
  parallel_for(n_methods * reps, resolve_thread_count(threads), [&](int id) {
    const int m = id / reps;
    const int r = id % reps;
    if (m < static_cast<int>(configs.size())) {
      traces[m][r] = run_bo(configs[m], r);
    } else {
      traces[m][r] = run_baseline_lhs(spec.base, r);
    }
  });

  if (!spec.base.output_dir.empty()) {
    const fs::path dir(spec.base.output_dir);
    fs::create_directories(dir);
    for (int m = 0; m < n_methods; ++m) {
      write_traces_csv((dir / (names[m] + ".csv")).string(), traces[m]);
    }
  }
  StudyResult result = aggregate(traces, n0);
  if (!spec.base.output_dir.empty()) {
    atomic_write_file((fs::path(spec.base.output_dir) / "summary.json").string(),
                      study_summary_json(result) + "\n");
  }
  return result;
}

std::string study_summary_json(const StudyResult& result) {
  nlohmann::ordered_json methods = nlohmann::ordered_json::object();
  for (const MethodSummary& s : result.methods) {
    nlohmann::ordered_json m;
    m["mean_trace"] = std::vector<double>(
        s.mean_trace.data(), s.mean_trace.data() + s.mean_trace.size());
    m["ci_lower"] = std::vector<double>(s.ci_lower.data(),
                                        s.ci_lower.data() + s.ci_lower.size());
    m["ci_upper"] = std::vector<double>(s.ci_upper.data(),
                                        s.ci_upper.data() + s.ci_upper.size());
    m["auc_mean"] = s.auc_mean;
    m["auc_se"] = s.auc_se;
    m["final_scores"] = s.final_scores;
    methods[s.method] = std::move(m);
  }
  nlohmann::ordered_json j;
  j["methods"] = std::move(methods);
  j["friedman"] = {{"statistic", result.friedman.statistic},
                   {"p_value", result.friedman.p_value},
                   {"p_underflow", result.friedman.p_underflow}};
  return j.dump(2);
}

FriedmanResult friedman_from_results_dir(const std::string& dir,
                                         std::vector<std::string>* method_names) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw StateError("no .csv result files in " + dir);

  std::vector<std::string> names;
  std::vector<std::vector<double>> bests;
  for (const fs::path& f : files) {
    for (const Trace& t : read_traces_csv(f.string())) {
      if (t.records.empty()) {
        throw StateError("empty trace in " + f.string());
      }
      const auto it = std::find(names.begin(), names.end(), t.method);
      std::size_t m;
      if (it == names.end()) {
        names.push_back(t.method);
        bests.emplace_back();
        m = names.size() - 1;
      } else {
        m = static_cast<std::size_t>(it - names.begin());
      }
      bests[m].push_back(t.records.back().best_so_far);
    }
  }
  const std::size_t reps = bests[0].size();
  for (std::size_t m = 0; m < names.size(); ++m) {
    if (bests[m].size() != reps) {
      throw StateError("method " + names[m] + " has " +
                       std::to_string(bests[m].size()) +
                       " replications, expected " + std::to_string(reps));
    }
  }
  MatrixXd B(static_cast<int>(reps), static_cast<int>(names.size()));
  for (std::size_t m = 0; m < names.size(); ++m) {
    for (std::size_t r = 0; r < reps; ++r) {
      B(static_cast<int>(r), static_cast<int>(m)) = bests[m][r];
    }
  }
  if (method_names) *method_names = names;
  return friedman_test(B);
}

}  // namespace bobench
