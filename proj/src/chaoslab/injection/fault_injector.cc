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

#include "chaoslab/injection/fault_injector.h"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "chaoslab/common/document.h"
#include "chaoslab/common/status_macros.h"
#include "chaoslab/common/strings.h"

namespace chaoslab::injection {

using nlohmann::json;

std::string_view TreatmentKindName(TreatmentKind kind) {
  switch (kind) {
    case TreatmentKind::kError:
      return "error";
    case TreatmentKind::kLatency:
      return "latency";
    case TreatmentKind::kErrorAndLatency:
      return "error_and_latency";
  }
  return "error";
}

std::optional<TreatmentKind> ParseTreatmentKind(std::string_view name) {
  if (name == "error") return TreatmentKind::kError;
  if (name == "latency") return TreatmentKind::kLatency;
  if (name == "error_and_latency" || name == "error-and-latency") {
    return TreatmentKind::kErrorAndLatency;
  }
  return std::nullopt;
}

absl::Status ValidateTreatment(const FailureTreatment& t) {
  const bool wants_latency = t.kind != TreatmentKind::kError;
  if (wants_latency) {
    if (!t.added_latency_ms) {
      return CodedError("treatment_invalid",
                        StrCat(TreatmentKindName(t.kind), " needs added_latency_ms"));
    }
    if (!(*t.added_latency_ms > 0) || !std::isfinite(*t.added_latency_ms)) {
      return CodedError("treatment_invalid", "added_latency_ms must be > 0");
    }
  } else if (t.added_latency_ms) {
    return CodedError("treatment_invalid", "added_latency_ms is only valid with latency");
  }
  if (!(t.failure_fraction > 0 && t.failure_fraction <= 1)) {
    return CodedError("treatment_invalid", "failure_fraction must be in (0,1]");
  }
  return absl::OkStatus();
}

absl::StatusOr<FailureTreatment> TreatmentFromJson(const json& doc, bool validate) {
  FailureTreatment t;
  CHAOSLAB_ASSIGN_OR_RETURN(std::string kind, RequireString(doc, "kind", "treatment"));
  std::optional<TreatmentKind> parsed = ParseTreatmentKind(kind);
  if (!parsed) return CodedError("treatment_invalid", StrCat("unknown kind ", kind));
  t.kind = *parsed;
  if (doc.contains("added_latency_ms") && !doc["added_latency_ms"].is_null()) {
    CHAOSLAB_ASSIGN_OR_RETURN(t.added_latency_ms,
                              RequireNumber(doc, "added_latency_ms", "treatment"));
  }
  CHAOSLAB_ASSIGN_OR_RETURN(t.failure_fraction,
                            OptionalNumber(doc, "failure_fraction", 1.0, "treatment"));
  if (validate) CHAOSLAB_RETURN_IF_ERROR(ValidateTreatment(t));
  return t;
}

json TreatmentToJson(const FailureTreatment& t) {
  json out{{"kind", TreatmentKindName(t.kind)}, {"failure_fraction", t.failure_fraction}};
  if (t.added_latency_ms) out["added_latency_ms"] = *t.added_latency_ms;
  return out;
}

std::string PointName(const InjectionPoint& p) {
  return StrCat(p.caller, "/", p.command_name, "->", p.target);
}

absl::StatusOr<InjectionPoint> PointFromJson(const json& doc) {
  InjectionPoint p;
  CHAOSLAB_ASSIGN_OR_RETURN(p.caller, RequireString(doc, "caller", "injection_point"));
  CHAOSLAB_ASSIGN_OR_RETURN(p.command_name, RequireString(doc, "command", "injection_point"));
  CHAOSLAB_ASSIGN_OR_RETURN(p.target, RequireString(doc, "target", "injection_point"));
  return p;
}

json PointToJson(const InjectionPoint& p) {
  return json{{"caller", p.caller}, {"command", p.command_name}, {"target", p.target}};
}

absl::Status ResolvePoint(const mesh::Topology& topology, const InjectionPoint& point) {
  const mesh::ServiceSpec* caller = topology.Find(point.caller);
  const mesh::CallEdge* edge = caller ? caller->FindEdge(point.command_name) : nullptr;
  if (edge == nullptr || edge->target != point.target) {
    return CodedError("unknown_point", PointName(point));
  }
  return absl::OkStatus();
}

json RuleToJson(const InjectionRule& rule) {
  json points = json::array();
  for (const auto& p : rule.points) points.push_back(PointToJson(p));
  return json{{"experiment_id", rule.experiment_id},
              {"points", points},
              {"treatment", TreatmentToJson(rule.treatment)},
              {"scope_group", rule.scope_group},
              {"armed", rule.armed}};
}

CallEffect ApplyTreatment(const FailureTreatment& t) {
  const Millis delay = t.added_latency_ms.value_or(0);
  switch (t.kind) {
    case TreatmentKind::kError:
      return {0, true};
    case TreatmentKind::kLatency:
      return {delay, false};
    case TreatmentKind::kErrorAndLatency:
      return {delay, true};
  }
  return {0, true};
}

absl::StatusOr<std::string> FaultInjector::Arm(InjectionRule rule) {
  if (rule.experiment_id.empty()) return CodedError("invalid_rule", "experiment_id is empty");
  if (rule.points.empty()) return CodedError("injection_points_empty", rule.experiment_id);
  for (const auto& p : rule.points) CHAOSLAB_RETURN_IF_ERROR(ResolvePoint(topology_, p));
  CHAOSLAB_RETURN_IF_ERROR(ValidateTreatment(rule.treatment));
  std::optional<routing::GroupKind> kind = groups_.KindOf(rule.scope_group);
  if (kind != routing::GroupKind::kExperiment) {
    return CodedError("scope_violation",
                      StrCat(rule.scope_group, " is not an experiment group"));
  }
  rule.armed = true;
  std::unique_lock lock(mu_);
  std::string id = rule.experiment_id;
  rules_[id] = std::move(rule);
  return id;
}

void FaultInjector::Disarm(const std::string& experiment_id) {
  std::unique_lock lock(mu_);
  rules_.erase(experiment_id);
}

std::optional<FailureTreatment> FaultInjector::ShouldInject(const RequestContext& ctx,
                                                            const InjectionPoint& point,
                                                            Rng& rng) const {
  if (!ctx.experiment_tag) return std::nullopt;
  std::shared_lock lock(mu_);
  auto it = rules_.find(*ctx.experiment_tag);
  if (it == rules_.end()) return std::nullopt;
  const InjectionRule& rule = it->second;
  if (!rule.armed || ctx.server_group != rule.scope_group) return std::nullopt;
  if (std::find(rule.points.begin(), rule.points.end(), point) == rule.points.end()) {
    return std::nullopt;
  }
  if (!rng.Bernoulli(rule.treatment.failure_fraction)) return std::nullopt;
  return rule.treatment;
}

std::optional<InjectionRule> FaultInjector::Rule(const std::string& experiment_id) const {
  std::shared_lock lock(mu_);
  auto it = rules_.find(experiment_id);
  if (it == rules_.end()) return std::nullopt;
  return it->second;
}

std::vector<InjectionRule> FaultInjector::Rules() const {
  std::shared_lock lock(mu_);
  std::vector<InjectionRule> out;
  for (const auto& [_, r] : rules_) out.push_back(r);
  return out;
}

}  // namespace chaoslab::injection
