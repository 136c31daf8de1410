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

#include "chaoslab/analysis/comparison.h"

#include <algorithm>
#include <cmath>

namespace chaoslab::analysis {

using nlohmann::json;
using telemetry::MetricId;
using telemetry::Outcome;

namespace {

std::optional<double> Ratio(uint64_t num, uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> Minus(std::optional<double> a, std::optional<double> b) {
  if (!a || !b) return std::nullopt;
  return *a - *b;
}

json Opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

OutcomeCounts CountsOf(const telemetry::Snapshot& snap, const std::string& group,
                       const std::string& command) {
  OutcomeCounts c;
  c.success = snap.Total({group, command, Outcome::kSuccess});
  c.fallback_success = snap.Total({group, command, Outcome::kFallbackSuccess});
  c.fallback_failure = snap.Total({group, command, Outcome::kFallbackFailure});
  return c;
}

GroupSps SpsOf(const telemetry::Snapshot& snap, const std::string& group) {
  GroupSps g;
  g.group = group;
  g.stream_starts = snap.Total({group, std::string(telemetry::kSpsMetric), Outcome::kNone});
  g.requests = snap.Total({group, std::string(telemetry::kRequestsMetric), Outcome::kNone});
  const Millis seconds = (snap.to() - snap.from()) / kMillisPerSecond;
  g.per_second = seconds > 0 ? static_cast<double>(g.stream_starts) / seconds : 0;
  g.normalized = Ratio(g.stream_starts, g.requests);
  return g;
}

json CountsJson(const OutcomeCounts& c) {
  return json{{"success", c.success},
              {"fallback_success", c.fallback_success},
              {"fallback_failure", c.fallback_failure},
              {"executions", c.executions()}};
}

json FractionsJson(const OutcomeFractions& f) {
  return json{{"success", Opt(f.success)},
              {"fallback_success", Opt(f.fallback_success)},
              {"fallback_failure", Opt(f.fallback_failure)}};
}

json SpsJson(const GroupSps& g) {
  return json{{"group", g.group},
              {"stream_starts", g.stream_starts},
              {"requests", g.requests},
              {"per_second", g.per_second},
              {"normalized", Opt(g.normalized)}};
}

}  // namespace

OutcomeFractions FractionsOf(const OutcomeCounts& c) {
  const uint64_t n = c.executions();
  return {Ratio(c.success, n), Ratio(c.fallback_success, n), Ratio(c.fallback_failure, n)};
}

ComparisonReport CompareGroups(const telemetry::Snapshot& snapshot,
                               const orchestration::ExperimentSpec& spec,
                               const std::string& control_group,
                               const std::string& experiment_group) {
  ComparisonReport r;
  r.from = snapshot.from();
  r.to = snapshot.to();

  uint64_t exp_ff = 0;
  uint64_t exp_exec = 0;
  for (const auto& command : spec.tracked_commands) {
    CommandComparison cc;
    cc.command = command;
    cc.control = CountsOf(snapshot, control_group, command);
    cc.experiment = CountsOf(snapshot, experiment_group, command);
    cc.control_fractions = FractionsOf(cc.control);
    cc.experiment_fractions = FractionsOf(cc.experiment);
    cc.delta = {Minus(cc.experiment_fractions.success, cc.control_fractions.success),
                Minus(cc.experiment_fractions.fallback_success,
                      cc.control_fractions.fallback_success),
                Minus(cc.experiment_fractions.fallback_failure,
                      cc.control_fractions.fallback_failure)};
    cc.missing = !snapshot.HasCommand(control_group, command) &&
                 !snapshot.HasCommand(experiment_group, command);
    if (cc.missing) r.missing_commands.push_back(command);
    exp_ff += cc.experiment.fallback_failure;
    exp_exec += cc.experiment.executions();
    r.commands.push_back(std::move(cc));
  }
  r.experiment_fallback_failure_fraction = Ratio(exp_ff, exp_exec);

  r.control = SpsOf(snapshot, control_group);
  r.experiment = SpsOf(snapshot, experiment_group);
  if (r.control.normalized && r.experiment.normalized && *r.control.normalized > 0) {
    r.sps_ratio = *r.experiment.normalized / *r.control.normalized;
  }
  r.sps_difference = Minus(r.experiment.normalized, r.control.normalized);

  const double n1 = static_cast<double>(r.control.requests);
  const double n2 = static_cast<double>(r.experiment.requests);
  if (n1 > 0 && n2 > 0) {
    const double pooled = static_cast<double>(r.control.stream_starts + r.experiment.stream_starts) /
                          (n1 + n2);
    const double variance = pooled * (1 - pooled) * (1 / n1 + 1 / n2);
    if (variance > 0) r.z = *r.sps_difference / std::sqrt(variance);
  }
  return r;
}

json ComparisonReport::ToJson() const {
  json cmds = json::array();
  for (const auto& c : commands) {
    cmds.push_back({{"command", c.command},
                    {"control", CountsJson(c.control)},
                    {"experiment", CountsJson(c.experiment)},
                    {"control_fractions", FractionsJson(c.control_fractions)},
                    {"experiment_fractions", FractionsJson(c.experiment_fractions)},
                    {"delta", FractionsJson(c.delta)},
                    {"missing", c.missing}});
  }
  return json{{"window", {{"from_ms", ToWireMillis(from)}, {"to_ms", ToWireMillis(to)}}},
              {"commands", cmds},
              {"sps", {{"control", SpsJson(control)}, {"experiment", SpsJson(experiment)}}},
              {"sps_ratio", Opt(sps_ratio)},
              {"sps_difference", Opt(sps_difference)},
              {"z", z},
              {"experiment_fallback_failure_fraction", Opt(experiment_fallback_failure_fraction)},
              {"missing_commands", missing_commands}};
}

std::string_view VerdictResultName(VerdictResult result) {
  switch (result) {
    case VerdictResult::kResilient:
      return "resilient";
    case VerdictResult::kNotResilient:
      return "not_resilient";
    case VerdictResult::kInconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

std::vector<VerdictReason> SafetyViolations(const ComparisonReport& report,
                                            const orchestration::SafetyPolicy& policy) {
  std::vector<VerdictReason> out;
  const double sps_floor = 1 - policy.sps_drop_threshold;
  if (report.sps_ratio && *report.sps_ratio < sps_floor) {
    out.push_back({"sps_drop", *report.sps_ratio, sps_floor,
                   "normalized SPS ratio experiment/control below floor"});
  }
  if (report.experiment_fallback_failure_fraction &&
      *report.experiment_fallback_failure_fraction > policy.fallback_failure_threshold) {
    out.push_back({"fallback_failure", *report.experiment_fallback_failure_fraction,
                   policy.fallback_failure_threshold,
                   "experiment fallback_failure fraction over tracked commands above limit"});
  }
  return out;
}

Verdict Judge(const ComparisonReport& report, const orchestration::SafetyPolicy& policy) {
  Verdict v;
  v.samples = report.min_group_samples();
  if (v.samples < policy.min_samples) {
    v.result = VerdictResult::kInconclusive;
    return v;
  }
  v.reasons = SafetyViolations(report, policy);
  v.result = v.reasons.empty() ? VerdictResult::kResilient : VerdictResult::kNotResilient;
  return v;
}

json Verdict::ToJson() const {
  json reasons_json = json::array();
  for (const auto& r : reasons) {
    reasons_json.push_back({{"criterion", r.criterion},
                            {"measured", r.measured},
                            {"limit", r.limit},
                            {"detail", r.detail}});
  }
  return json{{"result", VerdictResultName(result)}, {"reasons", reasons_json}, {"samples", samples}};
}

}  // namespace chaoslab::analysis
