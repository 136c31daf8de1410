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

// Experiment lifecycle: validate, provision control and experiment groups,
// route and inject, watch the safety rules, tear down and report.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chaoslab/analysis/comparison.h"
#include "chaoslab/common/event_loop.h"
#include "chaoslab/injection/fault_injector.h"
#include "chaoslab/mesh/topology.h"
#include "chaoslab/orchestration/experiment_spec.h"
#include "chaoslab/routing/router.h"
#include "chaoslab/telemetry/metrics_store.h"
#include "json.hpp"

namespace chaoslab::orchestration {

enum class Phase : uint8_t {
  kDraft,
  kValidated,
  kProvisioning,
  kRunning,
  kConcluding,
  kCompleted,
  kAborted,
};

std::string_view PhaseName(Phase phase);
bool IsTerminal(Phase phase);
// Draft -> Validated -> Provisioning -> Running -> Concluding -> Completed,
// and Provisioning, Running or Concluding -> Aborted. Nothing leaves a
// terminal phase.
bool IsLegalPhaseTransition(Phase from, Phase to);

struct PhaseTransition {
  Phase from;
  Phase to;
  Millis at;
};

struct TeardownStep {
  std::string step;  // "disarm", "reroute", "decommission:<group>", "rollback:<group>"
  int attempts = 0;
  bool ok = false;
  std::string error;
};

struct ExperimentState {
  ExperimentSpec spec;
  Phase phase = Phase::kDraft;
  Millis created_at = 0;
  std::optional<Millis> started_at;
  std::optional<Millis> ends_at;
  std::optional<Millis> teardown_at;
  std::optional<std::string> abort_reason;
  std::vector<PhaseTransition> transitions;
  std::vector<SpecIssue> issues;
  std::string baseline_group;
  std::string control_group;
  std::string experiment_group;
  std::string software_version;
  std::vector<std::pair<std::string, double>> running_weights;
  std::vector<TeardownStep> teardown;
  bool teardown_complete = false;
  Millis next_evaluation_at = 0;
  std::optional<nlohmann::json> report;

  nlohmann::json ToJson(Millis now) const;
};

enum class TickAction : uint8_t { kContinue, kConclude, kAbort };

std::string_view TickActionName(TickAction action);

struct TickDecision {
  TickAction action = TickAction::kContinue;
  std::string reason;  // abort reason
  std::vector<analysis::VerdictReason> violations;
  bool evaluated = false;  // the safety rules ran on this tick
};

// Single owner of every experiment's state machine. Calls are serialized by
// one lock; the clock is the mesh's scheduler.
class Orchestrator {
 public:
  // Teardown and rollback steps are tried this many times.
  static constexpr int kMaxAttempts = 3;

  Orchestrator(const mesh::Topology& topology, const Scheduler& clock,
               telemetry::MetricsStore& metrics, routing::ServerGroupRegistry& groups,
               routing::TrafficRouter& router, injection::FaultInjector& injector,
               double max_divert = kDefaultMaxDivert);

  // New experiment in Draft. Fails with duplicate_id if the id is taken.
  absl::StatusOr<std::string> Create(ExperimentSpec spec);

  // Draft -> Validated when there are no issues; the issue list otherwise.
  absl::StatusOr<std::vector<SpecIssue>> Validate(const std::string& id);

  // Validated -> Provisioning -> Running. On a provisioning, arming or
  // routing failure everything done so far is rolled back and the
  // experiment ends Aborted.
  absl::Status Start(const std::string& id);

  // Running only. Safety rules are evaluated once per evaluation interval;
  // the experiment concludes once now >= ends_at.
  absl::StatusOr<TickDecision> MonitorTick(const std::string& id);

  // Both are idempotent once the experiment is terminal and return the
  // report produced by the first call; a teardown left incomplete is retried.
  absl::StatusOr<nlohmann::json> Conclude(const std::string& id);
  absl::StatusOr<nlohmann::json> Abort(const std::string& id, const std::string& reason);

  std::optional<ExperimentState> Get(const std::string& id) const;
  std::vector<ExperimentState> List() const;
  std::optional<nlohmann::json> Report(const std::string& id) const;
  // Clusters with an experiment in Provisioning, Running or Concluding.
  std::set<std::string> BusyClusters() const;

  // Live comparison over [started_at, now) for a running experiment.
  absl::StatusOr<analysis::ComparisonReport> LiveComparison(const std::string& id) const;

  Millis Now() const { return clock_.Now(); }
  const telemetry::MetricsStore& metrics() const { return metrics_; }

 private:
  ExperimentState* FindLocked(const std::string& id);
  void TransitionLocked(ExperimentState& e, Phase to);
  std::set<std::string> BusyClustersLocked(const std::string& except) const;
  void RollbackLocked(ExperimentState& e, const std::vector<std::string>& added,
                      bool rerouted);
  void TeardownLocked(ExperimentState& e);
  bool RunStep(ExperimentState& e, const std::string& name,
               const std::function<absl::Status()>& action);
  analysis::ComparisonReport CompareLocked(const ExperimentState& e, Millis to) const;
  nlohmann::json BuildReportLocked(const ExperimentState& e) const;
  absl::StatusOr<nlohmann::json> FinishLocked(ExperimentState& e, Phase terminal,
                                              std::optional<std::string> reason);

  const mesh::Topology& topology_;
  const Scheduler& clock_;
  telemetry::MetricsStore& metrics_;
  routing::ServerGroupRegistry& groups_;
  routing::TrafficRouter& router_;
  injection::FaultInjector& injector_;
  const double max_divert_;

  mutable std::mutex mu_;
  std::map<std::string, ExperimentState> experiments_;
};

// Aligns a window start down to a bucket boundary.
Millis AlignDown(Millis t, Millis bucket_width);
// Aligns a window end up to a bucket boundary.
Millis AlignUp(Millis t, Millis bucket_width);

}  // namespace chaoslab::orchestration
