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


// Headless drivers: a full experiment lifecycle, or plain traffic, on a
// simulated platform. Both are deterministic for a given seed.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "chaoslab/analysis/comparison.h"
#include "chaoslab/orchestration/experiment_spec.h"
#include "chaoslab/orchestration/platform.h"
#include "json.hpp"

namespace chaoslab::orchestration {

// Process exit codes shared by the CLI and the runner.
inline constexpr int kExitResilient = 0;
inline constexpr int kExitValidationFailure = 1;
inline constexpr int kExitNotResilient = 2;
inline constexpr int kExitInconclusive = 3;
inline constexpr int kExitUsage = 64;

struct RunOptions {
  // Traffic runs this long before the experiment is created.
  Millis warmup_ms = 10 * kMillisPerSecond;
  // And this long after teardown, to check nothing leaks.
  Millis tail_ms = 60 * kMillisPerSecond;
};

struct RunResult {
  int exit_code = kExitInconclusive;
  nlohmann::json report;
  std::vector<SpecIssue> issues;
  std::optional<analysis::VerdictResult> verdict;
};

int ExitCodeFor(analysis::VerdictResult result);

// Drives background traffic at the topology's rate, then runs the experiment
// through validate, start, monitoring and teardown. Validation issues give
// exit code 1 and a validation report; otherwise the exit code follows the
// verdict. The report gains a "post_teardown" section covering the tail.
absl::StatusOr<RunResult> RunExperimentOn(Platform& platform, const ExperimentSpec& spec,
                                          const RunOptions& options = {});

struct SimulationResult {
  mesh::SimulationSummary summary;
  telemetry::Snapshot snapshot;

  nlohmann::json ToJson() const;
};

// Runs the topology's traffic plan, optionally with another duration, and
// snapshots every group.
absl::StatusOr<SimulationResult> RunSimulation(Platform& platform,
                                               std::optional<double> duration_s = std::nullopt);

}  // namespace chaoslab::orchestration
