// Copyright 2026 The ChaosLab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Control-versus-experiment comparison and the automated verdict. Pure
// functions over frozen snapshots.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chaoslab/orchestration/experiment_spec.h"
#include "chaoslab/telemetry/metrics_store.h"
#include "json.hpp"

namespace chaoslab::analysis {

struct OutcomeCounts {
  uint64_t success = 0;
  uint64_t fallback_success = 0;
  uint64_t fallback_failure = 0;

  uint64_t executions() const { return success + fallback_success + fallback_failure; }
};

// Fractions of executions; absent when there were none.
struct OutcomeFractions {
  std::optional<double> success;
  std::optional<double> fallback_success;
  std::optional<double> fallback_failure;
};

OutcomeFractions FractionsOf(const OutcomeCounts& counts);

struct CommandComparison {
  std::string command;
  OutcomeCounts control;
  OutcomeCounts experiment;
  OutcomeFractions control_fractions;
  OutcomeFractions experiment_fractions;
  // experiment - control, present when both fractions are.
  OutcomeFractions delta;
  bool missing = false;  // recorded in neither group
};

struct GroupSps {
  std::string group;
  uint64_t stream_starts = 0;
  uint64_t requests = 0;
  double per_second = 0;
  std::optional<double> normalized;  // stream starts per routed request
};

struct ComparisonReport {
  Millis from = 0;
  Millis to = 0;
  std::vector<CommandComparison> commands;
  GroupSps control;
  GroupSps experiment;
  // Normalized SPS, experiment / control.
  std::optional<double> sps_ratio;
  // Difference of stream-start proportions, experiment - control.
  std::optional<double> sps_difference;
  // Pooled two-proportion z statistic on stream starts per request; 0 when
  // the pooled variance is zero.
  double z = 0;
  // Over all tracked commands in the experiment group.
  std::optional<double> experiment_fallback_failure_fraction;
  std::vector<std::string> missing_commands;

  uint64_t min_group_samples() const { return std::min(control.requests, experiment.requests); }
  nlohmann::json ToJson() const;
};

// Both groups are read over the snapshot's whole window.
ComparisonReport CompareGroups(const telemetry::Snapshot& snapshot,
                               const orchestration::ExperimentSpec& spec,
                               const std::string& control_group,
                               const std::string& experiment_group);

enum class VerdictResult : uint8_t { kResilient, kNotResilient, kInconclusive };

std::string_view VerdictResultName(VerdictResult result);

struct VerdictReason {
  std::string criterion;  // "sps_drop" or "fallback_failure"
  double measured = 0;
  double limit = 0;
  std::string detail;
};

struct Verdict {
  VerdictResult result = VerdictResult::kInconclusive;
  std::vector<VerdictReason> reasons;
  uint64_t samples = 0;  // smaller of the two groups' routed requests

  nlohmann::json ToJson() const;
};

// Threshold rules that are violated, regardless of sample size. Order is
// fixed: sps_drop, then fallback_failure.
std::vector<VerdictReason> SafetyViolations(const ComparisonReport& report,
                                            const orchestration::SafetyPolicy& policy);

// Inconclusive below min_samples in either group; otherwise resilient iff no
// safety rule is violated.
Verdict Judge(const ComparisonReport& report, const orchestration::SafetyPolicy& policy);

}  // namespace chaoslab::analysis
