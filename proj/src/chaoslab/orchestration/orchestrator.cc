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

#include "chaoslab/orchestration/orchestrator.h"

#include <cmath>
#include <utility>

#include "chaoslab/common/document.h"
#include "chaoslab/common/strings.h"

namespace chaoslab::orchestration {

using nlohmann::json;

namespace {

json OptMillis(const std::optional<Millis>& t) {
  return t ? json(ToWireMillis(*t)) : json(nullptr);
}

json WeightsJson(const std::vector<std::pair<std::string, double>>& weights) {
  json out = json::object();
  for (const auto& [g, w] : weights) out[g] = w;
  return out;
}

json TeardownJson(const ExperimentState& e) {
  json steps = json::array();
  for (const auto& s : e.teardown) {
    json step{{"step", s.step}, {"attempts", s.attempts}, {"ok", s.ok}};
    if (!s.error.empty()) step["error"] = s.error;
    steps.push_back(std::move(step));
  }
  return json{{"complete", e.teardown_complete}, {"steps", steps}};
}

}  // namespace

std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kDraft:
      return "Draft";
    case Phase::kValidated:
      return "Validated";
    case Phase::kProvisioning:
      return "Provisioning";
    case Phase::kRunning:
      return "Running";
    case Phase::kConcluding:
      return "Concluding";
    case Phase::kCompleted:
      return "Completed";
    case Phase::kAborted:
      return "Aborted";
  }
  return "Draft";
}

bool IsTerminal(Phase phase) { return phase == Phase::kCompleted || phase == Phase::kAborted; }

bool IsLegalPhaseTransition(Phase from, Phase to) {
  switch (from) {
    case Phase::kDraft:
      return to == Phase::kValidated;
    case Phase::kValidated:
      return to == Phase::kProvisioning;
    case Phase::kProvisioning:
      return to == Phase::kRunning || to == Phase::kAborted;
    case Phase::kRunning:
      return to == Phase::kConcluding || to == Phase::kAborted;
    case Phase::kConcluding:
      return to == Phase::kCompleted || to == Phase::kAborted;
    case Phase::kCompleted:
    case Phase::kAborted:
      return false;
  }
  return false;
}

std::string_view TickActionName(TickAction action) {
  switch (action) {
    case TickAction::kContinue:
      return "continue";
    case TickAction::kConclude:
      return "conclude";
    case TickAction::kAbort:
      return "abort";
  }
  return "continue";
}

Millis AlignDown(Millis t, Millis bucket_width) {
  return std::floor(t / bucket_width) * bucket_width;
}

Millis AlignUp(Millis t, Millis bucket_width) {
  return std::ceil(t / bucket_width) * bucket_width;
}

json ExperimentState::ToJson(Millis now) const {
  json transitions_json = json::array();
  for (const auto& t : transitions) {
    transitions_json.push_back(
        {{"from", PhaseName(t.from)}, {"to", PhaseName(t.to)}, {"at_ms", ToWireMillis(t.at)}});
  }
  json remaining = nullptr;
  if (phase == Phase::kRunning && ends_at) {
    remaining = ToWireMillis(std::max<Millis>(0, *ends_at - now));
  }
  return json{{"schema_version", kSchemaVersion},
              {"id", spec.id},
              {"phase", PhaseName(phase)},
              {"target_cluster", spec.target_cluster},
              {"created_at_ms", ToWireMillis(created_at)},
              {"started_at_ms", OptMillis(started_at)},
              {"ends_at_ms", OptMillis(ends_at)},
              {"teardown_at_ms", OptMillis(teardown_at)},
              {"time_remaining_ms", remaining},
              {"abort_reason", abort_reason ? json(*abort_reason) : json(nullptr)},
              {"transitions", transitions_json},
              {"issues", IssuesToJson(issues)},
              {"groups",
               {{"baseline", baseline_group},
                {"control", control_group},
                {"experiment", experiment_group},
                {"software_version", software_version}}},
              {"weights", WeightsJson(running_weights)},
              {"teardown", TeardownJson(*this)},
              {"report_available", report.has_value()},
              {"spec", SpecToJson(spec)}};
}

Orchestrator::Orchestrator(const mesh::Topology& topology, const Scheduler& clock,
                           telemetry::MetricsStore& metrics, routing::ServerGroupRegistry& groups,
                           routing::TrafficRouter& router, injection::FaultInjector& injector,
                           double max_divert)
    : topology_(topology),
      clock_(clock),
      metrics_(metrics),
      groups_(groups),
      router_(router),
      injector_(injector),
      max_divert_(max_divert) {}

ExperimentState* Orchestrator::FindLocked(const std::string& id) {
  auto it = experiments_.find(id);
  return it == experiments_.end() ? nullptr : &it->second;
}

void Orchestrator::TransitionLocked(ExperimentState& e, Phase to) {
  if (!IsLegalPhaseTransition(e.phase, to)) {
    throw std::logic_error(StrCat("illegal phase transition ", PhaseName(e.phase), " -> ",
                                  PhaseName(to)));
  }
  e.transitions.push_back({e.phase, to, clock_.Now()});
  e.phase = to;
}

std::set<std::string> Orchestrator::BusyClustersLocked(const std::string& except) const {
  std::set<std::string> out;
  for (const auto& [id, e] : experiments_) {
    if (id == except) continue;
    if (e.phase == Phase::kProvisioning || e.phase == Phase::kRunning ||
        e.phase == Phase::kConcluding) {
      out.insert(e.spec.target_cluster);
    }
  }
  return out;
}

std::set<std::string> Orchestrator::BusyClusters() const {
  std::lock_guard<std::mutex> lock(mu_);
  return BusyClustersLocked("");
}

absl::StatusOr<std::string> Orchestrator::Create(ExperimentSpec spec) {
  std::lock_guard<std::mutex> lock(mu_);
  if (spec.id.empty()) return CodedError("invalid_id", "id must be non-empty");
  if (experiments_.count(spec.id)) {
    return absl::AlreadyExistsError(StrCat("duplicate_id: ", spec.id));
  }
  ExperimentState e;
  e.created_at = clock_.Now();
  e.baseline_group = routing::BaselineGroupName(spec.target_cluster);
  e.control_group = routing::ControlGroupName(spec.target_cluster);
  e.experiment_group = routing::ExperimentGroupName(spec.target_cluster);
  e.spec = std::move(spec);
  const std::string id = e.spec.id;
  experiments_.emplace(id, std::move(e));
  return id;
}

absl::StatusOr<std::vector<SpecIssue>> Orchestrator::Validate(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  ExperimentState* e = FindLocked(id);
  if (e == nullptr) return absl::NotFoundError(StrCat("not_found: experiment ", id));
  if (e->phase == Phase::kValidated) return std::vector<SpecIssue>{};
  if (e->phase != Phase::kDraft) {
    return absl::FailedPreconditionError(
        StrCat("invalid_phase: cannot validate in ", PhaseName(e->phase)));
  }
  e->issues = ValidateSpec(e->spec, topology_, max_divert_, BusyClustersLocked(id));
  if (e->issues.empty()) TransitionLocked(*e, Phase::kValidated);
  return e->issues;
}

bool Orchestrator::RunStep(ExperimentState& e, const std::string& name,
                           const std::function<absl::Status()>& action) {
  TeardownStep* step = nullptr;
  for (auto& s : e.teardown) {
    if (s.step == name) step = &s;
  }
  if (step == nullptr) {
    e.teardown.push_back({name, 0, false, ""});
    step = &e.teardown.back();
  }
  if (step->ok) return true;
  for (int i = 0; i < kMaxAttempts; ++i) {
    ++step->attempts;
    absl::Status st = action();
    if (st.ok()) {
      step->ok = true;
      step->error.clear();
      return true;
    }
    step->error = std::string(StatusMessage(st));
  }
  return false;
}

void Orchestrator::RollbackLocked(ExperimentState& e, const std::vector<std::string>& added,
                                  bool rerouted) {
  bool ok = RunStep(e, "disarm", [&] {
    injector_.Disarm(e.spec.id);
    return absl::OkStatus();
  });
  if (rerouted) {
    ok = ok && RunStep(e, "reroute", [&] {
      return router_.Update(e.spec.target_cluster, {{e.baseline_group, 1.0}});
    });
  }
  for (const auto& group : added) {
    ok = RunStep(e, StrCat("rollback:", group), [&] { return groups_.Remove(group); }) && ok;
  }
  e.teardown_complete = ok;
  if (!e.teardown_at) e.teardown_at = clock_.Now();
}

void Orchestrator::TeardownLocked(ExperimentState& e) {
  if (!e.teardown_at) e.teardown_at = clock_.Now();
  // Strict order: no injection may reach restored traffic, and no group may
  // be decommissioned while it still receives traffic.
  if (!RunStep(e, "disarm", [&] {
        injector_.Disarm(e.spec.id);
        return absl::OkStatus();
      })) {
    e.teardown_complete = false;
    return;
  }
  if (!RunStep(e, "reroute", [&] {
        return router_.Update(e.spec.target_cluster, {{e.baseline_group, 1.0}});
      })) {
    e.teardown_complete = false;
    return;
  }
  bool ok = true;
  for (const auto& group : {e.control_group, e.experiment_group}) {
    ok = RunStep(e, StrCat("decommission:", group), [&] { return groups_.Remove(group); }) && ok;
  }
  e.teardown_complete = ok;
}

absl::Status Orchestrator::Start(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  ExperimentState* e = FindLocked(id);
  if (e == nullptr) return absl::NotFoundError(StrCat("not_found: experiment ", id));
  if (e->phase != Phase::kValidated) {
    return absl::FailedPreconditionError(
        StrCat("invalid_phase: cannot start in ", PhaseName(e->phase)));
  }
  // Another experiment may have claimed the cluster since validation.
  std::vector<SpecIssue> issues =
      ValidateSpec(e->spec, topology_, max_divert_, BusyClustersLocked(id));
  if (!issues.empty()) {
    e->issues = issues;
    return CodedError(issues.front().code, issues.front().message);
  }

  TransitionLocked(*e, Phase::kProvisioning);
  const ExperimentSpec& spec = e->spec;
  auto fail = [&](const std::vector<std::string>& added, bool rerouted,
                  const std::string& reason) {
    RollbackLocked(*e, added, rerouted);
    e->abort_reason = reason;
    TransitionLocked(*e, Phase::kAborted);
    e->report = BuildReportLocked(*e);
    return absl::UnavailableError(reason);
  };

  std::optional<routing::ServerGroup> baseline = groups_.Find(e->baseline_group);
  if (!baseline) return fail({}, false, StrCat("provisioning_failed: no baseline group ", e->baseline_group));
  e->software_version = baseline->software_version;

  std::vector<std::string> added;
  const std::pair<routing::GroupKind, std::string> clones[] = {
      {routing::GroupKind::kControl, e->control_group},
      {routing::GroupKind::kExperiment, e->experiment_group}};
  for (const auto& [kind, name] : clones) {
    absl::Status st = groups_.Add({name, spec.target_cluster, kind, e->software_version, spec.id});
    if (!st.ok()) {
      return fail(added, false, StrCat("provisioning_failed: ", StatusMessage(st)));
    }
    added.push_back(name);
  }

  TransitionLocked(*e, Phase::kRunning);
  const Millis now = clock_.Now();
  e->started_at = now;
  e->ends_at = now + spec.duration_ms();
  e->next_evaluation_at = now + spec.safety.evaluation_interval_ms;

  auto armed = injector_.Arm({spec.id, spec.injection_points, spec.treatment,
                              e->experiment_group, true});
  if (!armed.ok()) {
    return fail(added, false, StrCat("arm_failed: ", StatusMessage(armed.status())));
  }

  const double f = spec.diverted_fraction;
  std::vector<std::pair<std::string, double>> weights = {
      {e->baseline_group, 1.0 - f}, {e->control_group, f / 2}, {e->experiment_group, f / 2}};
  if (absl::Status st = router_.Update(spec.target_cluster, weights, spec.id); !st.ok()) {
    return fail(added, false, StrCat("routing_failed: ", StatusMessage(st)));
  }
  e->running_weights = std::move(weights);
  return absl::OkStatus();
}

analysis::ComparisonReport Orchestrator::CompareLocked(const ExperimentState& e,
                                                       Millis to) const {
  const Millis from = AlignDown(*e.started_at, metrics_.bucket_width());
  telemetry::Snapshot snap =
      metrics_.TakeSnapshot(from, to, {e.control_group, e.experiment_group});
  return analysis::CompareGroups(snap, e.spec, e.control_group, e.experiment_group);
}

absl::StatusOr<analysis::ComparisonReport> Orchestrator::LiveComparison(
    const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = experiments_.find(id);
  if (it == experiments_.end()) return absl::NotFoundError(StrCat("not_found: experiment ", id));
  const ExperimentState& e = it->second;
  if (!e.started_at) {
    return absl::FailedPreconditionError(StrCat("invalid_phase: ", id, " has not started"));
  }
  const Millis to = e.teardown_at ? AlignUp(*e.teardown_at, metrics_.bucket_width())
                                  : clock_.Now();
  return CompareLocked(e, to);
}

absl::StatusOr<TickDecision> Orchestrator::MonitorTick(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  ExperimentState* e = FindLocked(id);
  if (e == nullptr) return absl::NotFoundError(StrCat("not_found: experiment ", id));
  if (e->phase != Phase::kRunning) {
    return absl::FailedPreconditionError(
        StrCat("invalid_phase: monitor needs Running, not ", PhaseName(e->phase)));
  }
  const Millis now = clock_.Now();
  TickDecision d;

  // Never continue blind.
  if (!metrics_.available()) {
    d.action = TickAction::kAbort;
    d.reason = "telemetry_unavailable";
    auto report = FinishLocked(*e, Phase::kAborted, d.reason);
    if (!report.ok()) return report.status();
    return d;
  }

  if (now >= e->next_evaluation_at) {
    while (e->next_evaluation_at <= now) e->next_evaluation_at += e->spec.safety.evaluation_interval_ms;
    d.evaluated = true;
    analysis::ComparisonReport report = CompareLocked(*e, now);
    if (report.min_group_samples() >= e->spec.safety.min_samples) {
      d.violations = analysis::SafetyViolations(report, e->spec.safety);
    }
    if (!d.violations.empty()) {
      d.action = TickAction::kAbort;
      d.reason = d.violations.front().criterion;
      auto done = FinishLocked(*e, Phase::kAborted, d.reason);
      if (!done.ok()) return done.status();
      return d;
    }
  }

  if (now >= *e->ends_at) {
    d.action = TickAction::kConclude;
    auto done = FinishLocked(*e, Phase::kCompleted, std::nullopt);
    if (!done.ok()) return done.status();
  }
  return d;
}

absl::StatusOr<json> Orchestrator::FinishLocked(ExperimentState& e, Phase terminal,
                                                std::optional<std::string> reason) {
  if (IsTerminal(e.phase)) {
    if (!e.teardown_complete && e.started_at) {
      TeardownLocked(e);
      (*e.report)["teardown"] = TeardownJson(e);
    }
    return *e.report;
  }
  if (e.phase != Phase::kRunning && e.phase != Phase::kConcluding &&
      e.phase != Phase::kProvisioning) {
    return absl::FailedPreconditionError(
        StrCat("invalid_phase: ", e.spec.id, " is ", PhaseName(e.phase)));
  }
  if (terminal == Phase::kCompleted) {
    if (e.phase == Phase::kRunning) TransitionLocked(e, Phase::kConcluding);
    TeardownLocked(e);
    TransitionLocked(e, Phase::kCompleted);
  } else {
    e.abort_reason = reason;
    TransitionLocked(e, Phase::kAborted);
    TeardownLocked(e);
  }
  e.report = BuildReportLocked(e);
  return *e.report;
}

absl::StatusOr<json> Orchestrator::Conclude(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  ExperimentState* e = FindLocked(id);
  if (e == nullptr) return absl::NotFoundError(StrCat("not_found: experiment ", id));
  return FinishLocked(*e, Phase::kCompleted, std::nullopt);
}

absl::StatusOr<json> Orchestrator::Abort(const std::string& id, const std::string& reason) {
  std::lock_guard<std::mutex> lock(mu_);
  ExperimentState* e = FindLocked(id);
  if (e == nullptr) return absl::NotFoundError(StrCat("not_found: experiment ", id));
  return FinishLocked(*e, Phase::kAborted, reason);
}

std::optional<ExperimentState> Orchestrator::Get(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = experiments_.find(id);
  if (it == experiments_.end()) return std::nullopt;
  return it->second;
}

std::vector<ExperimentState> Orchestrator::List() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<ExperimentState> out;
  for (const auto& [_, e] : experiments_) out.push_back(e);
  return out;
}

std::optional<json> Orchestrator::Report(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = experiments_.find(id);
  if (it == experiments_.end()) return std::nullopt;
  return it->second.report;
}

json Orchestrator::BuildReportLocked(const ExperimentState& e) const {
  json transitions_json = json::array();
  for (const auto& t : e.transitions) {
    transitions_json.push_back(
        {{"from", PhaseName(t.from)}, {"to", PhaseName(t.to)}, {"at_ms", ToWireMillis(t.at)}});
  }
  json doc{{"schema_version", kSchemaVersion},
           {"kind", "experiment_report"},
           {"experiment_id", e.spec.id},
           {"spec", SpecToJson(e.spec)},
           {"phase", PhaseName(e.phase)},
           {"abort_reason", e.abort_reason ? json(*e.abort_reason) : json(nullptr)},
           {"timeline",
            {{"created_at_ms", ToWireMillis(e.created_at)},
             {"started_at_ms", OptMillis(e.started_at)},
             {"ends_at_ms", OptMillis(e.ends_at)},
             {"teardown_at_ms", OptMillis(e.teardown_at)},
             {"transitions", transitions_json}}},
           {"groups",
            {{"baseline", e.baseline_group},
             {"control", e.control_group},
             {"experiment", e.experiment_group},
             {"software_version", e.software_version}}},
           {"routing", {{"during", WeightsJson(e.running_weights)}}},
           {"teardown", TeardownJson(e)},
           {"thresholds",
            {{"sps_drop_threshold", e.spec.safety.sps_drop_threshold},
             {"fallback_failure_threshold", e.spec.safety.fallback_failure_threshold},
             {"min_samples", e.spec.safety.min_samples},
             {"max_divert", max_divert_},
             {"note", "thresholds are platform defaults unless set in the spec; they are not "
                      "calibrated against production data"}}}};

  if (auto table = router_.Table(e.spec.target_cluster)) {
    doc["routing"]["after"] = WeightsJson(table->weights);
  }

  if (e.started_at && e.teardown_at) {
    const Millis bw = metrics_.bucket_width();
    const Millis from = AlignDown(*e.started_at, bw);
    const Millis to = AlignUp(*e.teardown_at, bw);
    telemetry::Snapshot snap =
        metrics_.TakeSnapshot(from, to, {e.control_group, e.experiment_group});
    analysis::ComparisonReport cmp =
        analysis::CompareGroups(snap, e.spec, e.control_group, e.experiment_group);
    doc["comparison"] = cmp.ToJson();
    doc["verdict"] = analysis::Judge(cmp, e.spec.safety).ToJson();
    doc["metrics"] = snap.ToJson();
  } else {
    doc["comparison"] = nullptr;
    doc["verdict"] = analysis::Verdict{}.ToJson();
    doc["metrics"] = nullptr;
  }
  return doc;
}

}  // namespace chaoslab::orchestration
