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

#include <json.hpp>

#include <cstdint>
#include <string>

#include "bobench/acquisition.hpp"
#include "bobench/gp.hpp"

namespace bobench {

// JSON form of an acquisition spec, shared by campaign configs and study
// configs. `family` is mandatory; everything else falls back to defaults.
nlohmann::json acq_spec_to_json(const AcqSpec& spec);
AcqSpec acq_spec_from_json(const nlohmann::json& j);

// File-based ask/tell optimization of an expensive black box the caller
// evaluates out of process. Responses follow the maximization convention:
// larger is better.
struct CampaignConfig {
  int dim = 0;
  MatrixXd bounds;  // dim x 2, raw scale
  int batch_size = 1;
  int init_points = 2;
  std::uint64_t seed = 0;
  int design_iters = 2000;
  AcqSpec acq;

  void validate() const;
};

struct CampaignState {
  CampaignConfig config;
  int completed_batches = 0;  // batches with both ask and tell on disk
  bool outstanding = false;   // ask written, tell still pending
  MatrixXd X;                 // raw inputs accumulated from completed batches
  VectorXd y;                 // responses (maximization)
};

// Creates the directory and writes config.json; refuses to clobber an
// existing campaign.
void campaign_init(const std::string& dir, const CampaignConfig& cfg);

// Reconstructs the campaign purely from the files in `dir`, validating the
// ask/tell chain; a gap names the missing file.
CampaignState campaign_load(const std::string& dir);

// Writes the next query batch as ask_<k>.json and returns its path. Batch 0
// is the space-filling design; later batches come from a surrogate fit to all
// told responses. Re-asking before the matching tell returns the existing
// file unchanged.
std::string campaign_ask(const std::string& dir);

// Records responses for the outstanding batch. The file may be a bare JSON
// array or {"batch": k, "responses": [...]}; counts and finiteness are
// enforced, and telling with no outstanding batch is rejected.
void campaign_tell(const std::string& dir, const std::string& responses_file);

std::string campaign_ask_path(const std::string& dir, int batch);
std::string campaign_tell_path(const std::string& dir, int batch);

}  // namespace bobench
