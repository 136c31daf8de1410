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

#include "chaoslab/orchestration/experiment_spec.h"

#include <cctype>
#include <cmath>

#include "chaoslab/common/document.h"
#include "chaoslab/common/status_macros.h"
#include "chaoslab/common/strings.h"

namespace chaoslab::orchestration {

using nlohmann::json;

namespace {

bool ValidId(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
  }
  return true;
}

absl::StatusOr<SafetyPolicy> SafetyFromJson(const json& doc) {
  SafetyPolicy s;
  if (doc.is_null()) return s;
  constexpr std::string_view kWhere = "safety";
  CHAOSLAB_ASSIGN_OR_RETURN(s.sps_drop_threshold,
                            OptionalNumber(doc, "sps_drop_threshold", s.sps_drop_threshold, kWhere));
  CHAOSLAB_ASSIGN_OR_RETURN(s.fallback_failure_threshold,
                            OptionalNumber(doc, "fallback_failure_threshold",
                                           s.fallback_failure_threshold, kWhere));
  CHAOSLAB_ASSIGN_OR_RETURN(double interval_s,
                            OptionalNumber(doc, "evaluation_interval_s",
                                           s.evaluation_interval_ms / kMillisPerSecond, kWhere));
  s.evaluation_interval_ms = interval_s * kMillisPerSecond;
  CHAOSLAB_ASSIGN_OR_RETURN(int64_t min_samples,
                            OptionalInteger(doc, "min_samples",
                                            static_cast<int64_t>(s.min_samples), kWhere));
  if (min_samples < 0) return CodedError("safety_invalid", "min_samples must be >= 0");
  s.min_samples = static_cast<uint64_t>(min_samples);
  return s;
}

}  // namespace

absl::StatusOr<ExperimentSpec> SpecFromJson(const json& doc) {
  CHAOSLAB_RETURN_IF_ERROR(CheckSchemaVersion(doc));
  ExperimentSpec spec;
  CHAOSLAB_ASSIGN_OR_RETURN(spec.id, RequireString(doc, "id", ""));
  CHAOSLAB_ASSIGN_OR_RETURN(spec.target_cluster, RequireString(doc, "target_cluster", ""));

  auto points = doc.find("injection_points");
  if (points == doc.end() || points->is_null()) {
    return CodedError("missing_field", "injection_points");
  }
  if (!points->is_array()) return CodedError("invalid_field", "injection_points must be a list");
  for (const auto& p : *points) {
    CHAOSLAB_ASSIGN_OR_RETURN(injection::InjectionPoint point, injection::PointFromJson(p));
    spec.injection_points.push_back(std::move(point));
  }

  auto treatment = doc.find("treatment");
  if (treatment == doc.end() || treatment->is_null()) {
    return CodedError("missing_field", "treatment");
  }
  CHAOSLAB_ASSIGN_OR_RETURN(spec.treatment,
                            injection::TreatmentFromJson(*treatment, /*validate=*/false));

  CHAOSLAB_ASSIGN_OR_RETURN(spec.diverted_fraction, RequireNumber(doc, "diverted_fraction", ""));
  CHAOSLAB_ASSIGN_OR_RETURN(spec.duration_minutes, RequireNumber(doc, "duration_minutes", ""));

  auto tracked = doc.find("tracked_commands");
  if (tracked == doc.end() || tracked->is_null()) {
    return CodedError("missing_field", "tracked_commands");
  }
  if (!tracked->is_array()) return CodedError("invalid_field", "tracked_commands must be a list");
  for (const auto& c : *tracked) {
    if (!c.is_string()) return CodedError("invalid_field", "tracked_commands must be strings");
    spec.tracked_commands.push_back(c.get<std::string>());
  }

  auto safety = doc.find("safety");
  CHAOSLAB_ASSIGN_OR_RETURN(spec.safety, SafetyFromJson(safety == doc.end() ? json() : *safety));
  return spec;
}

absl::StatusOr<ExperimentSpec> LoadSpecFile(const std::string& path) {
  CHAOSLAB_ASSIGN_OR_RETURN(json doc, LoadDocumentFile(path));
  auto spec = SpecFromJson(doc);
  if (!spec.ok()) {
    return absl::Status(spec.status().code(),
                        StrCat(StatusMessage(spec.status()), " (in ", path, ")"));
  }
  return spec;
}

json SafetyToJson(const SafetyPolicy& s) {
  return json{{"sps_drop_threshold", s.sps_drop_threshold},
              {"fallback_failure_threshold", s.fallback_failure_threshold},
              {"evaluation_interval_s", s.evaluation_interval_ms / kMillisPerSecond},
              {"min_samples", s.min_samples}};
}

json SpecToJson(const ExperimentSpec& spec) {
  json points = json::array();
  for (const auto& p : spec.injection_points) points.push_back(injection::PointToJson(p));
  return json{{"schema_version", kSchemaVersion},
              {"id", spec.id},
              {"target_cluster", spec.target_cluster},
              {"injection_points", points},
              {"treatment", injection::TreatmentToJson(spec.treatment)},
              {"diverted_fraction", spec.diverted_fraction},
              {"duration_minutes", spec.duration_minutes},
              {"tracked_commands", spec.tracked_commands},
              {"safety", SafetyToJson(spec.safety)}};
}

json IssuesToJson(const std::vector<SpecIssue>& issues) {
  json out = json::array();
  for (const auto& i : issues) out.push_back({{"code", i.code}, {"message", i.message}});
  return out;
}

std::vector<SpecIssue> ValidateSpec(const ExperimentSpec& spec, const mesh::Topology& topology,
                                    double max_divert, const std::set<std::string>& busy_clusters) {
  std::vector<SpecIssue> issues;
  auto add = [&](std::string code, std::string message) {
    issues.push_back({std::move(code), std::move(message)});
  };

  if (!ValidId(spec.id)) add("invalid_id", "id must be 1-64 characters of [A-Za-z0-9_-]");

  const bool cluster_known = topology.Find(spec.target_cluster) != nullptr;
  if (!cluster_known) {
    add("unknown_cluster", spec.target_cluster);
  } else if (spec.target_cluster != topology.routed_cluster) {
    add("cluster_not_routable",
        StrCat(spec.target_cluster, " is not behind the front door; routable cluster is ",
               topology.routed_cluster));
  }

  if (spec.injection_points.empty()) add("injection_points_empty", "at least one point needed");
  for (const auto& p : spec.injection_points) {
    if (absl::Status st = injection::ResolvePoint(topology, p); !st.ok()) {
      add("unknown_point", injection::PointName(p));
    } else if (p.caller != spec.target_cluster) {
      add("point_outside_cluster",
          StrCat(injection::PointName(p), " is not a call made by ", spec.target_cluster));
    }
  }

  if (absl::Status st = injection::ValidateTreatment(spec.treatment); !st.ok()) {
    add("treatment_invalid", std::string(StatusMessage(st)));
  }

  if (!(spec.diverted_fraction > 0 && spec.diverted_fraction <= max_divert)) {
    add("fraction_out_of_range",
        StrCat("diverted_fraction ", spec.diverted_fraction, " not in (0, ", max_divert, "]"));
  }
  if (!(spec.duration_minutes > 0) || !std::isfinite(spec.duration_minutes)) {
    add("duration_invalid", "duration_minutes must be > 0");
  }

  if (spec.tracked_commands.empty()) add("tracked_commands_empty", "track at least one command");
  for (const auto& c : spec.tracked_commands) {
    bool found = false;
    for (const auto& svc : topology.services) found = found || svc.FindEdge(c) != nullptr;
    if (!found) add("unknown_command", c);
  }

  const SafetyPolicy& s = spec.safety;
  if (!(s.sps_drop_threshold > 0 && s.sps_drop_threshold < 1)) {
    add("safety_invalid", "sps_drop_threshold must be in (0,1)");
  }
  if (!(s.fallback_failure_threshold > 0 && s.fallback_failure_threshold < 1)) {
    add("safety_invalid", "fallback_failure_threshold must be in (0,1)");
  }
  if (!(s.evaluation_interval_ms > 0)) add("safety_invalid", "evaluation_interval_s must be > 0");

  if (cluster_known && busy_clusters.count(spec.target_cluster)) {
    add("cluster_busy", StrCat(spec.target_cluster, " already has an active experiment"));
  }
  return issues;
}

}  // namespace chaoslab::orchestration
