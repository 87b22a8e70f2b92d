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

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bobench/harness.hpp"
#include "bobench/math.hpp"
#include "bobench/rng.hpp"

using namespace bobench;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("bobench_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Trace make_trace(const std::string& method, int rep,
                 const std::vector<double>& scores) {
  Trace t;
  t.method = method;
  t.replication = rep;
  for (size_t i = 0; i < scores.size(); ++i) {
    EvalRecord r;
    r.eval_index = static_cast<int>(i);
    r.init_phase = false;
    r.x_raw = VectorXd::Constant(2, 0.5);
    r.y = 1.0 - scores[i];
    r.best_so_far = r.y;
    r.normalized_score = scores[i];
    t.records.push_back(r);
  }
  return t;
}

// Straightforward re-implementation of average ranks by counting, used as an
// independent referee for the sort-based production code.
double naive_friedman_statistic(const MatrixXd& values) {
  const int n = static_cast<int>(values.rows());
  const int k = static_cast<int>(values.cols());
  VectorXd rank_sums = VectorXd::Zero(k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      int less = 0, equal = 0;
      for (int m = 0; m < k; ++m) {
        if (values(i, m) < values(i, j)) ++less;
        if (m != j && values(i, m) == values(i, j)) ++equal;
      }
      rank_sums(j) += less + 1 + 0.5 * equal;
    }
  }
  double acc = 0.0;
  for (int j = 0; j < k; ++j) acc += rank_sums(j) * rank_sums(j);
  return 12.0 / (n * k * (k + 1.0)) * acc - 3.0 * n * (k + 1.0);
}

ExperimentConfig small_config(const std::string& fn, int init_per_dim,
                              int budget) {
  ExperimentConfig cfg;
  cfg.function_id = fn;
  cfg.init_per_dim = init_per_dim;
  cfg.budget = budget;
  cfg.replications = 10;
  cfg.master_seed = 7;
  cfg.acq.family = AcqFamily::kEi;
  return cfg;
}

}  // namespace

TEST_CASE("normalized score anchors and clamping") {
  const TestFunction& sphere = registry("sphere10");  // f_opt = 0
  CHECK(normalized_score(0.0, sphere, 10.0) == 1.0);
  CHECK(normalized_score(10.0, sphere, 10.0) == 0.0);
  CHECK(normalized_score(2.5, sphere, 10.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(normalized_score(25.0, sphere, 10.0) == 0.0);   // worse than reference
  CHECK(normalized_score(-1.0, sphere, 10.0) == 1.0);   // better than optimum
  CHECK_THROWS_AS(normalized_score(1.0, sphere, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(normalized_score(1.0, sphere, -5.0), std::invalid_argument);
}

TEST_CASE("reference means match the analytic uniform expectations") {
  const double sphere_ref = compute_f_ref(registry("sphere10"), 10000, kReferenceSeed);
  CHECK(std::abs(sphere_ref - 87.38) < 0.5);  // 10 * 5.12^2 / 3
  const double griewank_ref =
      compute_f_ref(registry("griewank8"), 10000, kReferenceSeed);
  CHECK(std::abs(griewank_ref - 241.0) < 2.0);
  CHECK(compute_f_ref(registry("sphere10"), 10000, kReferenceSeed) == sphere_ref);
  CHECK_THROWS_AS(compute_f_ref(registry("sphere10"), 5000, kReferenceSeed),
                  std::invalid_argument);
}

TEST_CASE("reference cache hits, misses, and rewrites") {
  TempDir dir;
  const TestFunction& sphere = registry("sphere10");
  const double fresh = compute_f_ref_cached(sphere, 10000, kReferenceSeed, dir.str());
  CHECK(std::abs(fresh - 87.38) < 0.5);
  CHECK(fs::exists(dir.path / "f_ref_cache.json"));

  // A matching cache entry is served verbatim, proving the read path.
  nlohmann::json j;
  j["sphere10"] = {{"samples", 10000},
                   {"seed", kReferenceSeed},
                   {"value", 123.0}};
  std::ofstream(dir.path / "f_ref_cache.json") << j.dump();
  CHECK(compute_f_ref_cached(sphere, 10000, kReferenceSeed, dir.str()) == 123.0);

  // A stale entry (different sample count) is recomputed and replaced.
  const double recomputed =
      compute_f_ref_cached(sphere, 20000, kReferenceSeed, dir.str());
  CHECK(std::abs(recomputed - 87.38) < 0.5);
  const nlohmann::json back =
      nlohmann::json::parse(slurp(dir.path / "f_ref_cache.json"));
  CHECK(back["sphere10"]["samples"] == 20000);
}

TEST_CASE("area under the score curve") {
  const Trace t = make_trace("m", 0, {0.1, 0.3, 0.2, 0.4, 0.9, 1.0});
  CHECK(auc(t, 2) == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(auc(t, 0) == doctest::Approx((0.1 + 0.3 + 0.2 + 0.4 + 0.9 + 1.0) / 6.0));
  const Trace all_ones = make_trace("m", 0, {1.0, 1.0, 1.0});
  CHECK(auc(all_ones, 1) == 1.0);
  CHECK_THROWS_AS(auc(t, 6), std::invalid_argument);
  CHECK_THROWS_AS(auc(t, 7), std::invalid_argument);
}

TEST_CASE("Friedman test on a clean sweep and on ties") {
  MatrixXd sweep(10, 2);
  for (int i = 0; i < 10; ++i) {
    sweep(i, 0) = 1.0;  // method A always wins (smaller best value)
    sweep(i, 1) = 2.0;
  }
  const FriedmanResult r = friedman_test(sweep);
  CHECK(r.statistic == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(std::abs(r.p_value - 0.001565402) < 1e-5);
  CHECK(!r.p_underflow);

  MatrixXd tied = MatrixXd::Constant(6, 3, 1.5);
  const FriedmanResult rt = friedman_test(tied);
  CHECK(rt.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rt.p_value == 1.0);

  MatrixXd bad(2, 2);
  bad << 1.0, 2.0, std::nan(""), 0.5;
  CHECK_THROWS_AS(friedman_test(bad), std::invalid_argument);
  CHECK_THROWS_AS(friedman_test(MatrixXd::Zero(3, 1)), std::invalid_argument);
}

TEST_CASE("Friedman statistic is invariant to column order") {
  SplitMix64 rng(3);
  MatrixXd m(20, 3);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = rng.normal();
  const double base = friedman_test(m).statistic;
  MatrixXd perm(20, 3);
  perm.col(0) = m.col(2);
  perm.col(1) = m.col(0);
  perm.col(2) = m.col(1);
  CHECK(friedman_test(perm).statistic == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("Friedman test agrees with an independent rank computation") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(rng.next() % 10);
    const int k = 2 + static_cast<int>(rng.next() % 4);
    MatrixXd m(n, k);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < k; ++j) {
        // Quantized values produce plenty of ties.
        m(i, j) = std::floor(rng.uniform() * 6.0) / 2.0;
      }
    }
    const FriedmanResult r = friedman_test(m);
    const double expect = std::max(naive_friedman_statistic(m), 0.0);
    CHECK(std::abs(r.statistic - expect) <= 1e-9);
    CHECK(std::abs(r.p_value - chi_square_sf(expect, k - 1.0)) <= 1e-9);
  }
}

TEST_CASE("Friedman p-values flag underflow instead of lying") {
  MatrixXd huge(2000, 3);
  for (int i = 0; i < 2000; ++i) {
    huge(i, 0) = 1.0;
    huge(i, 1) = 2.0;
    huge(i, 2) = 3.0;
  }
  const FriedmanResult r = friedman_test(huge);
  CHECK(r.statistic == doctest::Approx(4000.0).epsilon(1e-9));
  CHECK(r.p_value == 0.0);
  CHECK(r.p_underflow);
}

TEST_CASE("aggregation: confidence bands and AUC moments") {
  std::vector<std::vector<Trace>> one = {{make_trace("m", 0, {0.5, 0.5, 0.5})}};
  const StudyResult single = aggregate(one, 1);
  REQUIRE(single.methods.size() == 1);
  CHECK(single.methods[0].mean_trace(1) == 0.5);
  CHECK(single.methods[0].ci_upper(1) == single.methods[0].ci_lower(1));
  CHECK(single.methods[0].auc_se == 0.0);

  std::vector<std::vector<Trace>> two = {
      {make_trace("m", 0, {0.4, 0.4, 0.4}), make_trace("m", 1, {0.6, 0.6, 0.6})}};
  const StudyResult pair = aggregate(two, 1);
  const MethodSummary& s = pair.methods[0];
  CHECK(s.mean_trace(2) == doctest::Approx(0.5).epsilon(1e-12));
  // sd = 0.1414..., half-width = 1.96 * sd / sqrt(2) = 0.196.
  CHECK(s.ci_upper(2) - s.mean_trace(2) == doctest::Approx(0.196).epsilon(1e-3));
  CHECK(s.auc_mean == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.auc_se == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(s.final_scores.size() == 2);

  std::vector<std::vector<Trace>> uneven = {
      {make_trace("a", 0, {0.1, 0.2})},
      {make_trace("b", 0, {0.1, 0.2}), make_trace("b", 1, {0.3, 0.4})}};
  CHECK_THROWS_AS(aggregate(uneven, 1), std::invalid_argument);
}

TEST_CASE("a budget equal to the design size yields a pure design trace") {
  ExperimentConfig cfg = small_config("hartmann6", 2, 12);
  const Trace t = run_bo(cfg, 0);
  REQUIRE(t.records.size() == 12);
  for (const auto& r : t.records) CHECK(r.init_phase);
  for (size_t i = 1; i < t.records.size(); ++i) {
    CHECK(t.records[i].best_so_far <= t.records[i - 1].best_so_far);
  }

  ExperimentConfig bad = small_config("hartmann6", 2, 11);
  CHECK_THROWS_AS(run_bo(bad, 0), std::invalid_argument);
  CHECK_THROWS_AS(run_bo(cfg, 10), std::invalid_argument);
}

TEST_CASE("optimization runs replay bit for bit and keep their invariants") {
  ExperimentConfig cfg = small_config("hartmann6", 2, 24);
  const Trace a = run_bo(cfg, 1);
  const Trace b = run_bo(cfg, 1);
  REQUIRE(a.records.size() == 24);
  REQUIRE(b.records.size() == 24);

  double running = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < a.records.size(); ++i) {
    const EvalRecord& ra = a.records[i];
    const EvalRecord& rb = b.records[i];
    CHECK(ra.y == rb.y);
    CHECK(ra.best_so_far == rb.best_so_far);
    CHECK(ra.normalized_score == rb.normalized_score);
    CHECK((ra.x_raw - rb.x_raw).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ra.eval_index == static_cast<int>(i));
    CHECK(ra.init_phase == (i < 12));
    // best_so_far is exactly the running minimum of the y column.
    running = std::min(running, ra.y);
    CHECK(ra.best_so_far == running);
    CHECK(ra.normalized_score >= 0.0);
    CHECK(ra.normalized_score <= 1.0);
  }
  // The optimizer phase must have been reached and bests never increase.
  CHECK(a.records.back().best_so_far <= a.records[11].best_so_far);
}

TEST_CASE("batched proposals still respect the evaluation budget exactly") {
  ExperimentConfig cfg = small_config("hartmann6", 1, 9);
  cfg.acq.family = AcqFamily::kGpBucb;
  cfg.acq.beta = 2.0;
  cfg.acq.batch_size = 4;  // 6 init + 4 would overshoot a budget of 9
  const Trace t = run_bo(cfg, 0);
  REQUIRE(t.records.size() == 9);
  for (size_t i = 0; i < t.records.size(); ++i) {
    CHECK(t.records[i].eval_index == static_cast<int>(i));
    CHECK(t.records[i].init_phase == (i < 6));
  }
}

TEST_CASE("noisy runs keep the trace on the clean scale") {
  ExperimentConfig cfg = small_config("hartmann6_high_noise", 1, 10);
  const Trace t = run_bo(cfg, 0);
  const TestFunction& fn = registry("hartmann6_high_noise");
  for (const auto& r : t.records) {
    // y must be the noise-free objective at the queried point.
    CHECK(r.y == doctest::Approx(evaluate(fn, r.x_raw)).epsilon(1e-15));
  }
}

TEST_CASE("the space-filling baseline fills the whole budget") {
  ExperimentConfig cfg = small_config("hartmann6", 2, 20);
  const Trace t = run_baseline_lhs(cfg, 0);
  CHECK(t.method == "lhs");
  REQUIRE(t.records.size() == 20);
  for (size_t i = 0; i < t.records.size(); ++i) {
    CHECK(t.records[i].init_phase == (i < 12));
  }
  const Trace again = run_baseline_lhs(cfg, 0);
  CHECK(t.records.back().best_so_far == again.records.back().best_so_far);
}

TEST_CASE("guided search beats the space-filling control on most replications") {
  ExperimentConfig cfg = small_config("hartmann6", 2, 60);
  int wins = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const Trace bo = run_bo(cfg, rep);
    const Trace lhs = run_baseline_lhs(cfg, rep);
    if (bo.records.back().best_so_far <= lhs.records.back().best_so_far) ++wins;
  }
  CHECK(wins >= 8);
}

TEST_CASE("traces survive the CSV round trip bit for bit") {
  ExperimentConfig cfg = small_config("hartmann6", 1, 8);
  std::vector<Trace> traces = {run_bo(cfg, 0), run_bo(cfg, 1)};
  TempDir dir;
  const std::string path = (dir.path / "ei.csv").string();
  write_traces_csv(path, traces);

  const std::string contents = slurp(path);
  CHECK(contents.rfind("method,replication,eval_index,phase,x_0,x_1,x_2,x_3,x_4,"
                       "x_5,y,best_so_far,normalized_score\n", 0) == 0);

  const std::vector<Trace> back = read_traces_csv(path);
  REQUIRE(back.size() == traces.size());
  for (size_t t = 0; t < traces.size(); ++t) {
    CHECK(back[t].method == traces[t].method);
    CHECK(back[t].replication == traces[t].replication);
    REQUIRE(back[t].records.size() == traces[t].records.size());
    for (size_t i = 0; i < traces[t].records.size(); ++i) {
      const EvalRecord& orig = traces[t].records[i];
      const EvalRecord& rt = back[t].records[i];
      CHECK(rt.eval_index == orig.eval_index);
      CHECK(rt.init_phase == orig.init_phase);
      CHECK(rt.y == orig.y);
      CHECK(rt.best_so_far == orig.best_so_far);
      CHECK(rt.normalized_score == orig.normalized_score);
      CHECK((rt.x_raw - orig.x_raw).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  CHECK_THROWS_AS(write_traces_csv(path, {}), std::invalid_argument);
  CHECK_THROWS_AS(read_traces_csv((dir.path / "missing.csv").string()), StateError);

  std::ofstream(dir.path / "bad.csv") << "who,knows\n1,2\n";
  CHECK_THROWS_AS(read_traces_csv((dir.path / "bad.csv").string()), StateError);

  std::ofstream(dir.path / "short.csv")
      << "method,replication,eval_index,phase,x_0,y,best_so_far,normalized_score\n"
      << "ei,0,0,init,0.5,1.0\n";
  CHECK_THROWS_AS(read_traces_csv((dir.path / "short.csv").string()), StateError);
}

TEST_CASE("parallel_for covers every task once and propagates failures") {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](int i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);

  CHECK_THROWS_AS(parallel_for(16, 4,
                               [&](int i) {
                                 if (i == 7) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("thread count resolution") {
  CHECK(resolve_thread_count(3) == 3);
  ::setenv("BOBENCH_THREADS", "5", 1);
  CHECK(resolve_thread_count(0) == 5);
  ::setenv("BOBENCH_THREADS", "not-a-number", 1);
  CHECK(resolve_thread_count(0) >= 1);
  ::unsetenv("BOBENCH_THREADS");
  CHECK(resolve_thread_count(0) >= 1);
}

TEST_CASE("a full study writes traces, summary, and consistent statistics") {
  TempDir dir;
  StudySpec spec;
  spec.base = small_config("hartmann6", 2, 18);
  spec.base.replications = 2;
  spec.base.output_dir = dir.str();
  AcqSpec ei_spec;
  ei_spec.family = AcqFamily::kEi;
  AcqSpec ucb_spec;
  ucb_spec.family = AcqFamily::kUcb;
  ucb_spec.beta = 1.0;
  spec.methods = {ei_spec, ucb_spec};
  spec.include_baseline = true;

  const StudyResult result = run_study(spec, 2);
  REQUIRE(result.methods.size() == 3);
  CHECK(result.methods[0].method == "ei");
  CHECK(result.methods[1].method == "ucb-b1");
  CHECK(result.methods[2].method == "lhs");
  for (const auto& m : result.methods) {
    CHECK(m.mean_trace.size() == 18);
    CHECK(m.final_scores.size() == 2);
    CHECK(std::isfinite(m.auc_mean));
  }
  CHECK(fs::exists(dir.path / "ei.csv"));
  CHECK(fs::exists(dir.path / "ucb-b1.csv"));
  CHECK(fs::exists(dir.path / "lhs.csv"));
  CHECK(fs::exists(dir.path / "summary.json"));

  const nlohmann::json summary = nlohmann::json::parse(slurp(dir.path / "summary.json"));
  CHECK(summary.contains("methods"));
  CHECK(summary["methods"].contains("ei"));
  CHECK(summary["methods"]["ei"].contains("auc_mean"));
  CHECK(summary["methods"]["ei"]["mean_trace"].size() == 18);
  CHECK(summary.contains("friedman"));
  CHECK(summary["friedman"].contains("p_value"));

  std::vector<std::string> names;
  const FriedmanResult from_disk = friedman_from_results_dir(dir.str(), &names);
  CHECK(names.size() == 3);
  CHECK(from_disk.statistic ==
        doctest::Approx(result.friedman.statistic).epsilon(1e-12));

  StudySpec dup = spec;
  dup.methods = {ei_spec, ei_spec};
  CHECK_THROWS_AS(run_study(dup, 1), std::invalid_argument);

  // Without an output directory the study still runs, entirely in memory.
  StudySpec no_dir = spec;
  no_dir.base.output_dir.clear();
  const StudyResult in_memory = run_study(no_dir, 1);
  CHECK(in_memory.methods.size() == 3);
  CHECK(in_memory.methods[0].final_scores ==
        result.methods[0].final_scores);
}

TEST_CASE("study outputs are identical for any worker count") {
  StudySpec spec;
  spec.base = small_config("hartmann6", 2, 16);
  spec.base.replications = 2;
  AcqSpec ei_spec;
  ei_spec.family = AcqFamily::kEi;
  AcqSpec mc_spec;
  mc_spec.family = AcqFamily::kMcUcb;
  mc_spec.beta = 1.0;
  mc_spec.batch_size = 2;
  mc_spec.batch_mode = BatchMode::kSequential;
  mc_spec.mc_samples = 128;
  spec.methods = {ei_spec, mc_spec};

  TempDir dir_a, dir_b;
  spec.base.output_dir = dir_a.str();
  run_study(spec, 1);
  spec.base.output_dir = dir_b.str();
  run_study(spec, 3);

  for (const char* name : {"ei.csv", "mc-ucb-b1-q2-seq.csv", "summary.json"}) {
    CHECK(slurp(dir_a.path / name) == slurp(dir_b.path / name));
  }
}

TEST_CASE("run_replications covers every replication in order") {
  ExperimentConfig cfg = small_config("hartmann6", 1, 7);
  cfg.replications = 3;
  const std::vector<Trace> traces = run_replications(cfg, 2);
  REQUIRE(traces.size() == 3);
  for (int r = 0; r < 3; ++r) {
    CHECK(traces[r].replication == r);
    CHECK(traces[r].records.size() == 7);
  }
}
