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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bobench/acquisition.hpp"
#include "bobench/batch.hpp"
#include "bobench/testbed.hpp"

namespace bobench {

// Raised for on-disk protocol violations (campaign state, malformed results).
struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string function_id;
  AcqSpec acq;
  int init_per_dim = 5;
  int budget = 200;
  int replications = 10;
  std::uint64_t master_seed = 0;
  std::string output_dir;

  int design_iters = 2000;     // maximin swap proposals per design
  int f_ref_samples = 10000;   // reference-mean sample count

  void validate() const;
  int init_count() const;
};

struct EvalRecord {
  int eval_index = 0;  // 0-based across the whole run
  bool init_phase = false;
  VectorXd x_raw;
  double y = 0.0;  // noise-free objective value, minimization scale
  double best_so_far = 0.0;
  double normalized_score = 0.0;
};

struct Trace {
  std::string method;
  int replication = 0;
  std::vector<EvalRecord> records;
  double wall_time_sec = 0.0;
};

struct MethodSummary {
  std::string method;
  VectorXd mean_trace;
  VectorXd ci_lower;
  VectorXd ci_upper;
  double auc_mean = 0.0;
  double auc_se = 0.0;
  std::vector<double> auc_values;
  std::vector<double> final_bests;  // minimization scale, one per replication
  std::vector<double> final_scores;
};

struct FriedmanResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool p_underflow = false;
};

struct StudyResult {
  std::vector<MethodSummary> methods;
  FriedmanResult friedman;
};

// Score in [0,1]: 0 at the reference mean, 1 at the global optimum.
double normalized_score(double best_so_far, const TestFunction& fn, double f_ref);

// Mean of the noise-free function over a seeded space-filling sample; the
// lower anchor of the normalized score.
double compute_f_ref(const TestFunction& fn, int sample_count, std::uint64_t seed);

// Same, backed by a JSON cache file in output_dir (atomic writes, safe to
// race between identical computations).
double compute_f_ref_cached(const TestFunction& fn, int sample_count,
                            std::uint64_t seed, const std::string& output_dir);

// Fixed seed for reference means so scores are comparable across studies.
inline constexpr std::uint64_t kReferenceSeed = 1000003;

// Mean normalized score over the evaluations after the initial design.
double auc(const Trace& trace, int init_count);

// Friedman rank test over a replications x methods matrix of final bests
// (average ranks on ties); p from the chi-square survival function with
// k-1 degrees of freedom.
FriedmanResult friedman_test(const MatrixXd& best_values);

// Per-method mean trace with normal-approximation 95% confidence bands, AUC
// mean with standard error, and the Friedman test over final bests.
StudyResult aggregate(const std::vector<std::vector<Trace>>& per_method_traces,
                      int init_count);

// One proposal batch (rows on the unit cube) for any strategy except the
// portfolio, which needs a refit between selection and reward.
MatrixXd propose_points(const Dataset& data, const KernelParams& params,
                        const AcqSpec& spec, int round, std::uint64_t acq_seed);

// One full optimization run: shared-design initialization, fit/propose/
// evaluate loop, per-iteration warm refit. Deterministic given
// (master_seed, replication).
Trace run_bo(const ExperimentConfig& cfg, int replication);

// Space-filling control: a single design exhausting the budget.
Trace run_baseline_lhs(const ExperimentConfig& cfg, int replication);

void write_traces_csv(const std::string& path, const std::vector<Trace>& traces);
std::vector<Trace> read_traces_csv(const std::string& path);

// Writes through a temporary file and renames, so readers never observe a
// partial file.
void atomic_write_file(const std::string& path, const std::string& contents);

// Worker count: `requested` if positive, else the BOBENCH_THREADS environment
// variable, else hardware concurrency.
int resolve_thread_count(int requested = 0);

// Runs tasks 0..count-1 on a small pool; results must be stored by task
// index so the outcome is independent of scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& task);

// All replications of one configuration, in parallel.
std::vector<Trace> run_replications(const ExperimentConfig& cfg, int threads);

struct StudySpec {
  ExperimentConfig base;        // acq field ignored; methods below apply
  std::vector<AcqSpec> methods;
  bool include_baseline = false;
};

// Runs every (method, replication) pair, writes one CSV per method plus a
// summary JSON into base.output_dir, and returns the aggregate.
StudyResult run_study(const StudySpec& spec, int threads);

std::string study_summary_json(const StudyResult& result);

// Final best values grouped from result CSVs in a directory (one method per
// file), assembled into the Friedman input matrix.
FriedmanResult friedman_from_results_dir(const std::string& dir,
                                         std::vector<std::string>* method_names = nullptr);

}  // namespace bobench
