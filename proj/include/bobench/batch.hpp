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

#include "bobench/acquisition.hpp"
#include "bobench/gp.hpp"
#include "bobench/inner_opt.hpp"

namespace bobench {

enum class BatchProvenance {
  kMcJoint,
  kMcSequential,
  kClMin,
  kClMax,
  kGpBucb,
};

struct BatchProposal {
  MatrixXd points;  // q x d, unit cube
  BatchProvenance provenance = BatchProvenance::kMcJoint;
  // One entry per point for greedy strategies; a single entry for the joint
  // strategy, whose value belongs to the batch as a whole.
  VectorXd acq_values;
};

enum class LieMode { kMin, kMax };

// `round` is the 1-based outer-loop iteration, used only to resolve a
// variable exploration weight; it advances once per batch.

// Maximizes the q-point Monte Carlo acquisition over the (q*d)-dimensional
// box in one shot; base samples are drawn once and fixed.
BatchProposal propose_mc_joint(const Dataset& data, const KernelParams& p,
                               const AcqSpec& spec, int round,
                               std::uint64_t seed);

// Greedy construction: point j maximizes the j-point acquisition with points
// 1..j-1 held fixed, reusing the first j columns of the shared base samples.
BatchProposal propose_mc_sequential(const Dataset& data, const KernelParams& p,
                                    const AcqSpec& spec, int round,
                                    std::uint64_t seed);

// Greedy analytical-EI batch with fantasized responses: after each point, the
// posterior is refit (hyperparameters frozen) on the data plus a constant
// "lie" response (min or max over the real observations). The real dataset is
// never modified.
BatchProposal propose_constant_liar(const Dataset& data, const KernelParams& p,
                                    const AcqSpec& spec, LieMode lie_mode,
                                    std::uint64_t seed);

// Greedy UCB batch where the posterior mean stays frozen at the batch start
// and the variance is re-conditioned on every already-chosen batch input.
BatchProposal propose_gp_bucb(const Dataset& data, const KernelParams& p,
                              const AcqSpec& spec, int round,
                              std::uint64_t seed);

}  // namespace bobench
