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

#include "bobench/campaign.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bobench/harness.hpp"
#include "bobench/rng.hpp"
#include "bobench/testbed.hpp"

namespace bobench {
namespace {

namespace fs = std::filesystem;

const char* family_token(AcqFamily f) {
  switch (f) {
    case AcqFamily::kPi: return "pi";
    case AcqFamily::kEi: return "ei";
    case AcqFamily::kUcb: return "ucb";
    case AcqFamily::kHedge: return "hedge";
    case AcqFamily::kMcPi: return "mc-pi";
    case AcqFamily::kMcEi: return "mc-ei";
    case AcqFamily::kMcUcb: return "mc-ucb";
    case AcqFamily::kMes: return "mes";
    case AcqFamily::kClMin: return "cl-min";
    case AcqFamily::kClMax: return "cl-max";
    case AcqFamily::kGpBucb: return "gp-bucb";
  }
  throw std::logic_error("unhandled acquisition family");
}

AcqFamily family_from_token(const std::string& s) {
  if (s == "pi") return AcqFamily::kPi;
  if (s == "ei") return AcqFamily::kEi;
  if (s == "ucb") return AcqFamily::kUcb;
  if (s == "hedge") return AcqFamily::kHedge;
  if (s == "mc-pi") return AcqFamily::kMcPi;
  if (s == "mc-ei") return AcqFamily::kMcEi;
  if (s == "mc-ucb") return AcqFamily::kMcUcb;
  if (s == "mes") return AcqFamily::kMes;
  if (s == "cl-min") return AcqFamily::kClMin;
  if (s == "cl-max") return AcqFamily::kClMax;
  if (s == "gp-bucb") return AcqFamily::kGpBucb;
  throw std::invalid_argument("unknown acquisition family '" + s + "'");
}

nlohmann::json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw StateError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw StateError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

nlohmann::json config_to_json(const CampaignConfig& c) {
  nlohmann::json bounds = nlohmann::json::array();
  for (int j = 0; j < c.dim; ++j) {
    bounds.push_back({c.bounds(j, 0), c.bounds(j, 1)});
  }
  return {{"dim", c.dim},
          {"bounds", bounds},
          {"batch_size", c.batch_size},
          {"init_points", c.init_points},
          {"seed", c.seed},
          {"design_iters", c.design_iters},
          {"acq", acq_spec_to_json(c.acq)}};
}

CampaignConfig config_from_json(const nlohmann::json& j, const fs::path& path) {
  for (const char* key :
       {"dim", "bounds", "batch_size", "init_points", "seed", "acq"}) {
    if (!j.contains(key)) {
      throw StateError("config " + path.string() + " is missing '" + key + "'");
    }
  }
  CampaignConfig c;
  c.dim = j["dim"].get<int>();
  if (c.dim < 1) throw StateError("config has non-positive dim");
  const auto& b = j["bounds"];
  if (!b.is_array() || static_cast<int>(b.size()) != c.dim) {
    throw StateError("config bounds must list one [lo, hi] pair per dimension");
  }
  c.bounds.resize(c.dim, 2);
  for (int r = 0; r < c.dim; ++r) {
    if (!b[r].is_array() || b[r].size() != 2) {
      throw StateError("config bounds must list one [lo, hi] pair per dimension");
    }
    c.bounds(r, 0) = b[r][0].get<double>();
    c.bounds(r, 1) = b[r][1].get<double>();
  }
  c.batch_size = j["batch_size"].get<int>();
  c.init_points = j["init_points"].get<int>();
  c.seed = j["seed"].get<std::uint64_t>();
  c.design_iters = j.value("design_iters", 2000);
  c.acq = acq_spec_from_json(j["acq"]);
  return c;
}

struct FileSurvey {
  int max_k = -1;  // highest batch index seen in any ask/tell filename
};

int parse_batch_suffix(const std::string& name, const std::string& prefix) {
  if (name.size() <= prefix.size() + 5 || name.rfind(prefix, 0) != 0 ||
      name.substr(name.size() - 5) != ".json") {
    return -1;
  }
  const std::string digits =
      name.substr(prefix.size(), name.size() - prefix.size() - 5);
  if (digits.empty()) return -1;
  for (char ch : digits) {
    if (ch < '0' || ch > '9') return -1;
  }
  return std::stoi(digits);
}

FileSurvey survey_dir(const fs::path& dir) {
  FileSurvey s;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    s.max_k = std::max(s.max_k, parse_batch_suffix(name, "ask_"));
    s.max_k = std::max(s.max_k, parse_batch_suffix(name, "tell_"));
  }
  return s;
}

// Points of one ask file as a rows x dim matrix, checked against the config.
MatrixXd ask_points(const nlohmann::json& j, const CampaignConfig& cfg, int k,
                    const fs::path& path) {
  if (!j.is_object() || j.value("batch", -1) != k || !j.contains("points") ||
      !j["points"].is_array()) {
    throw StateError("malformed ask file " + path.string());
  }
  const auto& pts = j["points"];
  const int expected = k == 0 ? cfg.init_points : cfg.batch_size;
  if (static_cast<int>(pts.size()) != expected) {
    throw StateError(path.string() + " holds " + std::to_string(pts.size()) +
                     " points, expected " + std::to_string(expected));
  }
  MatrixXd X(expected, cfg.dim);
  for (int i = 0; i < expected; ++i) {
    if (!pts[i].is_array() || static_cast<int>(pts[i].size()) != cfg.dim) {
      throw StateError("point dimension mismatch in " + path.string());
    }
    for (int d = 0; d < cfg.dim; ++d) {
      const double v = pts[i][d].get<double>();
      if (!std::isfinite(v) || v < cfg.bounds(d, 0) - 1e-9 ||
          v > cfg.bounds(d, 1) + 1e-9) {
        throw StateError("point outside the configured bounds in " +
                         path.string());
      }
      X(i, d) = std::min(cfg.bounds(d, 1), std::max(cfg.bounds(d, 0), v));
    }
  }
  return X;
}

VectorXd tell_responses(const nlohmann::json& j, int k, int expected,
                        const fs::path& path) {
  if (!j.is_object() || j.value("batch", -1) != k ||
      !j.contains("responses") || !j["responses"].is_array()) {
    throw StateError("malformed tell file " + path.string());
  }
  const auto& resp = j["responses"];
  if (static_cast<int>(resp.size()) != expected) {
    throw StateError(path.string() + " holds " + std::to_string(resp.size()) +
                     " responses, expected " + std::to_string(expected));
  }
  VectorXd y(expected);
  for (int i = 0; i < expected; ++i) {
    if (!resp[i].is_number()) {
      throw StateError("non-numeric response in " + path.string());
    }
    y[i] = resp[i].get<double>();
    if (!std::isfinite(y[i])) {
      throw StateError("non-finite response in " + path.string());
    }
  }
  return y;
}

nlohmann::json points_to_json(const MatrixXd& X) {
  nlohmann::json pts = nlohmann::json::array();
  for (int i = 0; i < X.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int d = 0; d < X.cols(); ++d) row.push_back(X(i, d));
    pts.push_back(std::move(row));
  }
  return pts;
}

}  // namespace

nlohmann::json acq_spec_to_json(const AcqSpec& s) {
  return {{"family", family_token(s.family)},
          {"beta_mode",
           s.beta_mode == BetaMode::kVariable ? "variable" : "fixed"},
          {"beta", s.beta},
          {"delta", s.delta},
          {"mc_samples", s.mc_samples},
          {"temperature", s.temperature},
          {"hedge_eta", s.hedge_eta},
          {"batch_size", s.batch_size},
          {"batch_mode", s.batch_mode == BatchMode::kJoint
                             ? "joint"
                             : s.batch_mode == BatchMode::kSequential
                                   ? "sequential"
                                   : "single"}};
}

AcqSpec acq_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family")) {
    throw std::invalid_argument("acquisition spec needs a 'family'");
  }
  AcqSpec s;
  s.family = family_from_token(j["family"].get<std::string>());
  const std::string bm = j.value("beta_mode", "fixed");
  if (bm == "fixed") {
    s.beta_mode = BetaMode::kFixed;
  } else if (bm == "variable") {
    s.beta_mode = BetaMode::kVariable;
  } else {
    throw std::invalid_argument("beta_mode must be 'fixed' or 'variable'");
  }
  s.beta = j.value("beta", s.beta);
  s.delta = j.value("delta", s.delta);
  s.mc_samples = j.value("mc_samples", s.mc_samples);
  s.temperature = j.value("temperature", s.temperature);
  s.hedge_eta = j.value("hedge_eta", s.hedge_eta);
  s.batch_size = j.value("batch_size", s.batch_size);
  const std::string mode = j.value("batch_mode", "single");
  if (mode == "single") {
    s.batch_mode = BatchMode::kSingle;
  } else if (mode == "joint") {
    s.batch_mode = BatchMode::kJoint;
  } else if (mode == "sequential") {
    s.batch_mode = BatchMode::kSequential;
  } else {
    throw std::invalid_argument(
        "batch_mode must be 'single', 'joint' or 'sequential'");
  }
  s.validate();
  return s;
}

void CampaignConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("dim must be at least 1");
  if (bounds.rows() != dim || bounds.cols() != 2) {
    throw std::invalid_argument("bounds must be dim x 2");
  }
  for (int j = 0; j < dim; ++j) {
    if (!std::isfinite(bounds(j, 0)) || !std::isfinite(bounds(j, 1)) ||
        !(bounds(j, 0) < bounds(j, 1))) {
      throw std::invalid_argument("each bound must satisfy lo < hi");
    }
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (init_points < 2) throw std::invalid_argument("init_points must be >= 2");
  if (design_iters < 0) {
    throw std::invalid_argument("design_iters must be non-negative");
  }
  acq.validate();
  if (acq.family == AcqFamily::kHedge) {
    throw std::invalid_argument(
        "the portfolio acquisition needs per-round rewards and is not "
        "available in campaign mode");
  }
  if (acq.batch_size != batch_size) {
    throw std::invalid_argument(
        "acquisition batch_size must match the campaign batch_size");
  }
}

std::string campaign_ask_path(const std::string& dir, int batch) {
  return (fs::path(dir) / ("ask_" + std::to_string(batch) + ".json")).string();
}

std::string campaign_tell_path(const std::string& dir, int batch) {
  return (fs::path(dir) / ("tell_" + std::to_string(batch) + ".json")).string();
}

void campaign_init(const std::string& dir, const CampaignConfig& cfg) {
  cfg.validate();
  fs::create_directories(dir);
  const fs::path cfg_path = fs::path(dir) / "config.json";
  if (fs::exists(cfg_path)) {
    throw StateError("campaign already initialized: " + cfg_path.string());
  }
  atomic_write_file(cfg_path.string(), config_to_json(cfg).dump(2) + "\n");
}

CampaignState campaign_load(const std::string& dir) {
  const fs::path d(dir);
  if (!fs::is_directory(d)) {
    throw StateError("campaign directory " + dir + " does not exist");
  }
  CampaignState st;
  st.config = config_from_json(load_json(d / "config.json"), d / "config.json");
  st.config.validate();

  const FileSurvey survey = survey_dir(d);
  for (int k = 0; k <= survey.max_k; ++k) {
    if (!fs::exists(campaign_ask_path(dir, k))) {
      throw StateError("campaign state is missing " +
                       campaign_ask_path(dir, k));
    }
    if (k < survey.max_k && !fs::exists(campaign_tell_path(dir, k))) {
      throw StateError("campaign state is missing " +
                       campaign_tell_path(dir, k));
    }
  }
  if (survey.max_k < 0) return st;  // freshly initialized

  st.outstanding = !fs::exists(campaign_tell_path(dir, survey.max_k));
  st.completed_batches = survey.max_k + (st.outstanding ? 0 : 1);

  std::vector<MatrixXd> xs;
  std::vector<VectorXd> ys;
  int total = 0;
  for (int k = 0; k <= survey.max_k; ++k) {
    const fs::path ask_path(campaign_ask_path(dir, k));
    const MatrixXd X = ask_points(load_json(ask_path), st.config, k, ask_path);
    if (k == survey.max_k && st.outstanding) break;  // validated, not told yet
    const fs::path tell_path(campaign_tell_path(dir, k));
    const VectorXd y = tell_responses(load_json(tell_path), k,
                                      static_cast<int>(X.rows()), tell_path);
    xs.push_back(X);
    ys.push_back(y);
    total += static_cast<int>(X.rows());
  }
  st.X.resize(total, st.config.dim);
  st.y.resize(total);
  int at = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    st.X.middleRows(at, xs[i].rows()) = xs[i];
    st.y.segment(at, ys[i].size()) = ys[i];
    at += static_cast<int>(xs[i].rows());
  }
  return st;
}

std::string campaign_ask(const std::string& dir) {
  const CampaignState st = campaign_load(dir);
  const int k = st.completed_batches;
  const std::string ask_path = campaign_ask_path(dir, k);
  if (st.outstanding) return ask_path;  // idempotent re-ask

  const CampaignConfig& cfg = st.config;
  MatrixXd points_raw;
  if (k == 0) {
    const MatrixXd U =
        maximin_lhs_unit(cfg.init_points, cfg.dim, cfg.design_iters,
                         derive_seed(cfg.seed, seed_stream::kCampaign, 0));
    points_raw.resize(U.rows(), U.cols());
    for (int i = 0; i < U.rows(); ++i) {
      for (int j = 0; j < cfg.dim; ++j) {
        points_raw(i, j) =
            cfg.bounds(j, 0) + U(i, j) * (cfg.bounds(j, 1) - cfg.bounds(j, 0));
      }
    }
  } else {
    const Dataset data = Dataset::from_raw(st.X, st.y, cfg.bounds);
    KernelParams params;
    try {
      FitConfig fit_cfg;
      fit_cfg.seed = derive_seed(cfg.seed, seed_stream::kFit, k);
      params = fit_gp_mle(data, fit_cfg);
    } catch (const FitError& e) {
      params = heuristic_params(cfg.dim);
      std::fprintf(stderr,
                   "[bobench] warning: campaign batch %d: surrogate fit "
                   "failed (%s); using heuristic hyperparameters\n",
                   k, e.what());
    }
    const MatrixXd U =
        propose_points(data, params, cfg.acq, k,
                       derive_seed(cfg.seed, seed_stream::kCampaign, k));
    points_raw = data.to_raw(U);
  }

  nlohmann::json out;
  out["batch"] = k;
  out["points"] = points_to_json(points_raw);
  atomic_write_file(ask_path, out.dump(2) + "\n");
  return ask_path;
}

void campaign_tell(const std::string& dir, const std::string& responses_file) {
  const CampaignState st = campaign_load(dir);
  if (!st.outstanding) {
    throw StateError(
        "no outstanding batch to tell; ask first (a repeated tell is "
        "rejected as replay)");
  }
  const int k = st.completed_batches;

  const nlohmann::json j = load_json(responses_file);
  nlohmann::json resp;
  if (j.is_array()) {
    resp = j;
  } else if (j.is_object() && j.contains("responses")) {
    if (j.contains("batch") && j["batch"].is_number_integer() &&
        j["batch"].get<int>() != k) {
      throw StateError("responses target batch " +
                       std::to_string(j["batch"].get<int>()) + " but batch " +
                       std::to_string(k) + " is outstanding");
    }
    resp = j["responses"];
  } else {
    throw StateError(
        "responses file must be a JSON array or an object with 'responses'");
  }
  if (!resp.is_array()) {
    throw StateError("'responses' must be a JSON array");
  }

  const fs::path ask_path(campaign_ask_path(dir, k));
  const MatrixXd X = ask_points(load_json(ask_path), st.config, k, ask_path);
  if (static_cast<int>(resp.size()) != X.rows()) {
    throw StateError("expected " + std::to_string(X.rows()) +
                     " responses for batch " + std::to_string(k) + ", got " +
                     std::to_string(resp.size()));
  }
  VectorXd y(resp.size());
  for (int i = 0; i < static_cast<int>(resp.size()); ++i) {
    if (!resp[i].is_number()) {
      throw StateError("non-numeric response at index " + std::to_string(i));
    }
    y[i] = resp[i].get<double>();
    if (!std::isfinite(y[i])) {
      throw StateError("non-finite response at index " + std::to_string(i));
    }
  }

  nlohmann::json out;
  out["batch"] = k;
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < y.size(); ++i) arr.push_back(y[i]);
  out["responses"] = std::move(arr);
  atomic_write_file(campaign_tell_path(dir, k), out.dump(2) + "\n");
}

}  // namespace bobench
