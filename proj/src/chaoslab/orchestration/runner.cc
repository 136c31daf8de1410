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


#include "chaoslab/orchestration/runner.h"

#include <functional>

#include "chaoslab/common/document.h"
#include "chaoslab/common/status_macros.h"
#include "chaoslab/common/strings.h"

namespace chaoslab::orchestration {

using nlohmann::json;
using telemetry::Outcome;

int ExitCodeFor(analysis::VerdictResult result) {
  switch (result) {
    case analysis::VerdictResult::kResilient:
      return kExitResilient;
    case analysis::VerdictResult::kNotResilient:
      return kExitNotResilient;
    case analysis::VerdictResult::kInconclusive:
      return kExitInconclusive;
  }
  return kExitInconclusive;
}

namespace {

uint64_t SumOutcome(const telemetry::MetricsStore& metrics, Outcome outcome, Millis from,
                    Millis to) {
  uint64_t total = 0;
  for (const auto& id : metrics.ListMetrics()) {
    if (id.outcome == outcome) total += metrics.Total(id, from, to);
  }
  return total;
}

}  // namespace

absl::StatusOr<RunResult> RunExperimentOn(Platform& platform, const ExperimentSpec& spec,
                                          const RunOptions& options) {
  const mesh::Topology& topo = platform.topology();
  if (!topo.traffic) {
    return CodedError("missing_traffic", StrCat("topology ", topo.name, " has no traffic plan"));
  }
  EventLoop& loop = platform.loop();
  Orchestrator& orch = platform.orchestrator();
  const Millis bw = platform.metrics().bucket_width();

  platform.mesh().SchedulePoissonTraffic(topo.traffic->rate_per_s, topo.traffic->users,
                                         loop.Now());
  loop.RunUntil(loop.Now() + options.warmup_ms);

  RunResult result;
  auto created = orch.Create(spec);
  if (!created.ok()) return created.status();
  auto issues = orch.Validate(spec.id);
  if (!issues.ok()) return issues.status();
  if (!issues->empty()) {
    platform.mesh().StopTraffic();
    loop.Run();
    result.exit_code = kExitValidationFailure;
    result.issues = *issues;
    result.report = json{{"schema_version", kSchemaVersion},
                         {"kind", "validation_report"},
                         {"experiment_id", spec.id},
                         {"spec", SpecToJson(spec)},
                         {"issues", IssuesToJson(*issues)}};
    return result;
  }
  // A failed start leaves an Aborted experiment with a report.
  (void)orch.Start(spec.id);

  // Ticks run after every ordinary event at the same instant. The loop is
  // fully drained before this function returns.
  std::function<void()> tick = [&] {
    auto state = orch.Get(spec.id);
    if (!state || state->phase != Phase::kRunning) return;
    (void)orch.MonitorTick(spec.id);
    loop.Schedule(loop.Now() + bw, [&] { tick(); }, EventPriority::kDeadline);
  };
  loop.Schedule(AlignUp(loop.Now() + 1, bw), [&] { tick(); }, EventPriority::kDeadline);
  while (true) {
    auto state = orch.Get(spec.id);
    if (state && IsTerminal(state->phase)) break;
    loop.RunUntil(loop.Now() + bw);
  }

  const ExperimentState state = *orch.Get(spec.id);
  const Millis tail_from = AlignUp(*state.teardown_at, bw);
  loop.RunUntil(tail_from + options.tail_ms);
  platform.mesh().StopTraffic();
  loop.Run();
  const Millis tail_to = AlignUp(loop.Now(), bw) + bw;

  const telemetry::MetricsStore& m = platform.metrics();
  uint64_t to_clones = 0;
  for (const auto& group : {state.control_group, state.experiment_group}) {
    to_clones += m.Total({group, std::string(telemetry::kRequestsMetric), Outcome::kNone},
                         tail_from, tail_to);
  }
  result.report = *state.report;
  result.report["post_teardown"] = {
      {"window", {{"from_ms", ToWireMillis(tail_from)}, {"to_ms", ToWireMillis(tail_to)}}},
      {"injected_error", SumOutcome(m, Outcome::kInjectedError, tail_from, tail_to)},
      {"injected_latency", SumOutcome(m, Outcome::kInjectedLatency, tail_from, tail_to)},
      {"requests_routed_to_clones", to_clones}};
  result.report["run"] = {{"scenario", topo.name},
                          {"seed", platform.options().seed},
                          {"warmup_ms", ToWireMillis(options.warmup_ms)},
                          {"tail_ms", ToWireMillis(options.tail_ms)}};

  const std::string verdict = result.report["verdict"]["result"].get<std::string>();
  for (auto r : {analysis::VerdictResult::kResilient, analysis::VerdictResult::kNotResilient,
                 analysis::VerdictResult::kInconclusive}) {
    if (analysis::VerdictResultName(r) == verdict) result.verdict = r;
  }
  result.exit_code = ExitCodeFor(result.verdict.value_or(analysis::VerdictResult::kInconclusive));
  return result;
}

json SimulationResult::ToJson() const {
  return json{{"schema_version", kSchemaVersion},
              {"kind", "simulation_report"},
              {"summary", summary.ToJson()},
              {"metrics", snapshot.ToJson()}};
}

absl::StatusOr<SimulationResult> RunSimulation(Platform& platform,
                                               std::optional<double> duration_s) {
  const mesh::Topology& topo = platform.topology();
  if (!topo.traffic) {
    return CodedError("missing_traffic", StrCat("topology ", topo.name, " has no traffic plan"));
  }
  mesh::TrafficPlan plan = *topo.traffic;
  if (duration_s) plan.duration_s = *duration_s;
  CHAOSLAB_RETURN_IF_ERROR(mesh::ValidateTrafficPlan(plan));
  SimulationResult out;
  out.summary = platform.mesh().RunTraffic(plan);
  const Millis bw = platform.metrics().bucket_width();
  out.snapshot = platform.metrics().TakeSnapshot(0, AlignUp(platform.loop().Now(), bw) + bw);
  return out;
}

}  // namespace chaoslab::orchestration
