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

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "bobench/campaign.hpp"
#include "bobench/harness.hpp"
#include "bobench/testbed.hpp"

namespace {

using namespace bobench;

struct AcqCliOptions {
  std::string family = "ei";
  double beta = 1.0;
  bool beta_variable = false;
  double delta = 0.1;
  int mc_samples = 512;
  double temperature = 0.01;
  double eta = 1.0;
  int batch = 1;
  std::string batch_mode;  // empty: single for q=1, required for MC batches
};

void add_acq_options(CLI::App* cmd, AcqCliOptions* o) {
  cmd->add_option("--acq", o->family,
                  "acquisition: pi, ei, ucb, hedge, mc-pi, mc-ei, mc-ucb, "
                  "mes, cl-min, cl-max, gp-bucb")
      ->required();
  cmd->add_option("--beta", o->beta, "fixed exploration weight for ucb forms");
  cmd->add_flag("--beta-variable", o->beta_variable,
                "use the growing confidence schedule instead of a fixed beta");
  cmd->add_option("--delta", o->delta,
                  "confidence parameter of the variable schedule");
  cmd->add_option("--mc-samples", o->mc_samples,
                  "base sample count for Monte Carlo acquisitions");
  cmd->add_option("--temperature", o->temperature,
                  "sigmoid temperature of the MC probability form");
  cmd->add_option("--eta", o->eta, "portfolio softmax gain weight");
  cmd->add_option("--batch", o->batch, "points proposed per iteration");
  cmd->add_option("--batch-mode", o->batch_mode,
                  "joint or sequential (MC acquisitions with --batch > 1)");
}

AcqSpec make_spec(const AcqCliOptions& o) {
  std::string mode = o.batch_mode;
  if (mode.empty()) {
    if (o.batch > 1 && (o.family == "mc-pi" || o.family == "mc-ei" ||
                        o.family == "mc-ucb")) {
      throw CLI::ValidationError(
          "--batch-mode", "MC acquisitions with --batch > 1 need "
                          "--batch-mode joint or sequential");
    }
    mode = "single";
  }
  const nlohmann::json j{{"family", o.family},
                         {"beta_mode", o.beta_variable ? "variable" : "fixed"},
                         {"beta", o.beta},
                         {"delta", o.delta},
                         {"mc_samples", o.mc_samples},
                         {"temperature", o.temperature},
                         {"hedge_eta", o.eta},
                         {"batch_size", o.batch},
                         {"batch_mode", mode}};
  return acq_spec_from_json(j);
}

MatrixXd parse_bounds_list(const std::string& s) {
  std::vector<std::pair<double, double>> rows;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string item = s.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) {
      throw CLI::ValidationError("--bounds",
                                 "expected lo:hi pairs separated by commas");
    }
    try {
      rows.emplace_back(std::stod(item.substr(0, colon)),
                        std::stod(item.substr(colon + 1)));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--bounds", "bad number in '" + item + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  MatrixXd b(static_cast<int>(rows.size()), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    b(static_cast<int>(i), 0) = rows[i].first;
    b(static_cast<int>(i), 1) = rows[i].second;
  }
  return b;
}

void print_study(const StudyResult& result, const std::string& out_dir) {
  for (const MethodSummary& s : result.methods) {
    const int last = static_cast<int>(s.mean_trace.size()) - 1;
    std::printf("%-24s final score %.4f [%.4f, %.4f]  auc %.4f (se %.4f)\n",
                s.method.c_str(), s.mean_trace[last], s.ci_lower[last],
                s.ci_upper[last], s.auc_mean, s.auc_se);
  }
  if (result.methods.size() >= 2) {
    if (result.friedman.p_underflow) {
      std::printf("Friedman chi-square %.6f, p < 1e-300\n",
                  result.friedman.statistic);
    } else {
      std::printf("Friedman chi-square %.6f, p = %.6g\n",
                  result.friedman.statistic, result.friedman.p_value);
    }
  }
  if (!out_dir.empty()) std::printf("results written to %s\n", out_dir.c_str());
}

StudySpec study_from_json(const nlohmann::json& j) {
  for (const char* key : {"function", "budget", "methods"}) {
    if (!j.contains(key)) {
      throw StateError(std::string("study config is missing '") + key + "'");
    }
  }
  StudySpec spec;
  spec.base.function_id = j["function"].get<std::string>();
  spec.base.budget = j["budget"].get<int>();
  spec.base.init_per_dim = j.value("init_per_dim", 5);
  spec.base.replications = j.value("replications", 10);
  spec.base.master_seed = j.value("seed", std::uint64_t{0});
  spec.base.output_dir = j.value("output_dir", std::string());
  spec.base.design_iters = j.value("design_iters", 2000);
  spec.base.f_ref_samples = j.value("f_ref_samples", 10000);
  spec.include_baseline = j.value("baseline_lhs", false);
  if (!j["methods"].is_array() || j["methods"].empty()) {
    throw StateError("study config needs a non-empty 'methods' array");
  }
  for (const auto& m : j["methods"]) spec.methods.push_back(acq_spec_from_json(m));
  return spec;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Gaussian-process Bayesian optimization benchmark"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "synthetic benchmark studies");
  bench->require_subcommand(1);

  auto* bench_run = bench->add_subcommand("run", "run one method");
  AcqCliOptions acq_opts;
  ExperimentConfig run_cfg;
  int run_threads = 0;
  bool run_baseline = false;
  bench_run->add_option("--function", run_cfg.function_id, "test function id")
      ->required();
  add_acq_options(bench_run, &acq_opts);
  bench_run->add_option("--init-per-dim", run_cfg.init_per_dim,
                        "initial design points per input dimension");
  bench_run->add_option("--budget", run_cfg.budget, "total evaluation budget")
      ->required();
  bench_run->add_option("--reps", run_cfg.replications, "replications");
  bench_run->add_option("--seed", run_cfg.master_seed, "master seed");
  bench_run->add_option("--out", run_cfg.output_dir, "output directory");
  bench_run->add_option("--design-iters", run_cfg.design_iters,
                        "design improvement proposals");
  bench_run->add_option("--f-ref-samples", run_cfg.f_ref_samples,
                        "samples behind the reference mean");
  bench_run->add_option("--threads", run_threads,
                        "worker threads (default: BOBENCH_THREADS or cores)");
  bench_run->add_flag("--baseline", run_baseline,
                      "also run the space-filling baseline");
  bench_run->callback([&]() {
    StudySpec spec;
    spec.base = run_cfg;
    spec.methods.push_back(make_spec(acq_opts));
    spec.include_baseline = run_baseline;
    print_study(run_study(spec, run_threads), run_cfg.output_dir);
  });

  auto* bench_compare =
      bench->add_subcommand("compare", "run a study from a JSON config");
  std::string compare_config;
  std::string compare_out;
  int compare_threads = 0;
  bench_compare->add_option("--config", compare_config, "study config file")
      ->required()
      ->check(CLI::ExistingFile);
  bench_compare->add_option("--out", compare_out,
                            "override the config's output directory");
  bench_compare->add_option("--threads", compare_threads,
                            "worker threads (default: BOBENCH_THREADS or cores)");
  bench_compare->callback([&]() {
    std::ifstream in(compare_config);
    nlohmann::json j;
    in >> j;
    StudySpec spec = study_from_json(j);
    if (!compare_out.empty()) spec.base.output_dir = compare_out;
    print_study(run_study(spec, compare_threads), spec.base.output_dir);
  });

  auto* bench_friedman =
      bench->add_subcommand("friedman", "rank test over saved results");
  std::string friedman_dir;
  bench_friedman->add_option("--results", friedman_dir, "results directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  bench_friedman->callback([&]() {
    std::vector<std::string> names;
    const FriedmanResult res = friedman_from_results_dir(friedman_dir, &names);
    std::printf("methods:");
    for (const std::string& n : names) std::printf(" %s", n.c_str());
    std::printf("\n");
    if (res.p_underflow) {
      std::printf("Friedman chi-square %.6f, p < 1e-300\n", res.statistic);
    } else {
      std::printf("Friedman chi-square %.6f, p = %.6g\n", res.statistic,
                  res.p_value);
    }
  });

  // funcs
  auto* funcs = app.add_subcommand("funcs", "test function registry");
  funcs->require_subcommand(1);
  auto* funcs_list = funcs->add_subcommand("list", "list the registry");
  funcs_list->callback([]() {
    std::printf("%-22s %4s  %-22s %12s %10s\n", "id", "dim", "domain", "f_opt",
                "noise_std");
    for (const TestFunction& fn : test_functions()) {
      char domain[64];
      std::snprintf(domain, sizeof domain, "[%g, %g]^%d", fn.bounds(0, 0),
                    fn.bounds(0, 1), fn.dim);
      std::printf("%-22s %4d  %-22s %12.6g %10.4g\n", fn.id.c_str(), fn.dim,
                  domain, fn.f_opt, fn.noise_std);
    }
  });

  // campaign
  auto* campaign = app.add_subcommand("campaign", "file-based ask/tell loop");
  campaign->require_subcommand(1);

  auto* c_init = campaign->add_subcommand("init", "create a campaign");
  std::string c_dir;
  std::string c_bounds;
  AcqCliOptions c_acq;
  c_acq.family = "mc-ucb";
  c_acq.batch_mode = "sequential";
  CampaignConfig c_cfg;
  c_cfg.batch_size = 4;
  c_cfg.init_points = 8;
  c_init->add_option("--dir", c_dir, "campaign directory")->required();
  c_init->add_option("--bounds", c_bounds, "per-dimension lo:hi, comma separated")
      ->required();
  c_init->add_option("--batch", c_cfg.batch_size, "points per ask");
  c_init->add_option("--init", c_cfg.init_points, "initial design size");
  c_init->add_option("--seed", c_cfg.seed, "campaign seed");
  c_init->add_option("--design-iters", c_cfg.design_iters,
                     "design improvement proposals");
  c_init->add_option("--acq", c_acq.family, "acquisition family");
  c_init->add_option("--beta", c_acq.beta, "fixed exploration weight");
  c_init->add_flag("--beta-variable", c_acq.beta_variable,
                   "use the growing confidence schedule");
  c_init->add_option("--delta", c_acq.delta,
                     "confidence parameter of the variable schedule");
  c_init->add_option("--mc-samples", c_acq.mc_samples, "MC base samples");
  c_init->add_option("--batch-mode", c_acq.batch_mode,
                     "joint or sequential for MC batches");
  c_init->callback([&]() {
    c_cfg.bounds = parse_bounds_list(c_bounds);
    c_cfg.dim = static_cast<int>(c_cfg.bounds.rows());
    c_acq.batch = c_cfg.batch_size;
    if (c_cfg.batch_size == 1) c_acq.batch_mode.clear();
    c_cfg.acq = make_spec(c_acq);
    campaign_init(c_dir, c_cfg);
    std::printf("campaign initialized in %s\n", c_dir.c_str());
  });

  auto* c_ask = campaign->add_subcommand("ask", "write the next query batch");
  std::string ask_dir;
  c_ask->add_option("--dir", ask_dir, "campaign directory")->required();
  c_ask->callback([&]() {
    const std::string path = campaign_ask(ask_dir);
    std::printf("%s\n", path.c_str());
  });

  auto* c_tell = campaign->add_subcommand("tell", "record responses");
  std::string tell_dir;
  std::string tell_file;
  c_tell->add_option("--dir", tell_dir, "campaign directory")->required();
  c_tell->add_option("--responses", tell_file, "JSON responses file")
      ->required()
      ->check(CLI::ExistingFile);
  c_tell->callback([&]() {
    campaign_tell(tell_dir, tell_file);
    const CampaignState st = campaign_load(tell_dir);
    std::printf("recorded batch %d (%d observations total)\n",
                st.completed_batches - 1, static_cast<int>(st.y.size()));
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
