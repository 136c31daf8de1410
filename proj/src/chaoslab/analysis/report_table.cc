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


#include "chaoslab/analysis/report_table.h"

#include <iterator>
#include <string>

#include "fmt/format.h"

namespace chaoslab::analysis {

using nlohmann::json;

namespace {

std::string Num(const json& v, int precision = 4) {
  if (v.is_null()) return "n/a";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number()) return fmt::format("{:.{}f}", v.get<double>(), precision);
  return v.dump();
}

std::string Str(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

void RenderExperiment(const json& r, fmt::memory_buffer& out) {
  auto o = std::back_inserter(out);
  fmt::format_to(o, "experiment {}  phase {}", Str(r["experiment_id"]), Str(r["phase"]));
  if (!r["abort_reason"].is_null()) fmt::format_to(o, "  abort_reason {}", Str(r["abort_reason"]));
  fmt::format_to(o, "\n");
  const json& verdict = r["verdict"];
  fmt::format_to(o, "verdict {}  (samples per group: {})\n", Str(verdict["result"]),
                 Num(verdict["samples"]));
  for (const auto& reason : verdict["reasons"]) {
    fmt::format_to(o, "  reason {}: measured {} limit {}\n", Str(reason["criterion"]),
                   Num(reason["measured"]), Num(reason["limit"]));
  }

  const json& cmp = r["comparison"];
  if (!cmp.is_null()) {
    fmt::format_to(o, "window [{}, {}) ms\n\n", Num(cmp["window"]["from_ms"]),
                   Num(cmp["window"]["to_ms"]));
    fmt::format_to(o, "{:<16} {:<11} {:>10} {:>17} {:>17} {:>11}\n", "command", "group",
                   "success", "fallback_success", "fallback_failure", "executions");
    for (const auto& c : cmp["commands"]) {
      for (const char* group : {"control", "experiment"}) {
        const json& n = c[group];
        fmt::format_to(o, "{:<16} {:<11} {:>10} {:>17} {:>17} {:>11}\n", Str(c["command"]), group,
                       Num(n["success"]), Num(n["fallback_success"]),
                       Num(n["fallback_failure"]), Num(n["executions"]));
      }
      if (c["missing"].get<bool>()) fmt::format_to(o, "  ({} not recorded)\n", Str(c["command"]));
    }
    fmt::format_to(o, "\n{:<11} {:>14} {:>10} {:>12}\n", "sps group", "stream_starts", "requests",
                   "normalized");
    for (const char* group : {"control", "experiment"}) {
      const json& s = cmp["sps"][group];
      fmt::format_to(o, "{:<11} {:>14} {:>10} {:>12}\n", group, Num(s["stream_starts"]),
                     Num(s["requests"]), Num(s["normalized"]));
    }
    fmt::format_to(o, "sps_ratio {}  difference {}  z {}\n", Num(cmp["sps_ratio"]),
                   Num(cmp["sps_difference"]), Num(cmp["z"], 2));
  }

  const json& teardown = r["teardown"];
  fmt::format_to(o, "\nteardown {}:", teardown["complete"].get<bool>() ? "complete" : "INCOMPLETE");
  for (const auto& s : teardown["steps"]) {
    fmt::format_to(o, " {}({}{})", Str(s["step"]), Num(s["attempts"]),
                   s["ok"].get<bool>() ? "" : ", failed");
  }
  fmt::format_to(o, "\n");
  if (r.contains("post_teardown")) {
    const json& p = r["post_teardown"];
    fmt::format_to(o, "after teardown: injected_error {} injected_latency {} routed to clones {}\n",
                   Num(p["injected_error"]), Num(p["injected_latency"]),
                   Num(p["requests_routed_to_clones"]));
  }
  const json& t = r["thresholds"];
  fmt::format_to(o, "thresholds: sps_drop {} fallback_failure {} min_samples {} ({})\n",
                 Num(t["sps_drop_threshold"]), Num(t["fallback_failure_threshold"]),
                 Num(t["min_samples"]), Str(t["note"]));
}

void RenderValidation(const json& r, fmt::memory_buffer& out) {
  auto o = std::back_inserter(out);
  fmt::format_to(o, "experiment {}  invalid\n", Str(r["experiment_id"]));
  for (const auto& issue : r["issues"]) {
    fmt::format_to(o, "  {}: {}\n", Str(issue["code"]), Str(issue["message"]));
  }
}

void RenderSimulation(const json& r, fmt::memory_buffer& out) {
  auto o = std::back_inserter(out);
  const json& s = r["summary"];
  fmt::format_to(o, "requests {}  success {}  degraded {}  failure {}  end {} ms\n",
                 Num(s["requests"]), Num(s["success"]), Num(s["degraded"]), Num(s["failure"]),
                 Num(s["end_time_ms"]));
  for (const auto& [group, n] : s["requests_by_group"].items()) {
    fmt::format_to(o, "  {:<24} {:>10}\n", group, Num(n));
  }
}

}  // namespace

std::string RenderReport(const json& report) {
  fmt::memory_buffer out;
  const std::string kind = report.value("kind", "");
  if (kind == "experiment_report") {
    RenderExperiment(report, out);
  } else if (kind == "validation_report") {
    RenderValidation(report, out);
  } else if (kind == "simulation_report") {
    RenderSimulation(report, out);
  } else {
    return report.dump(2) + "\n";
  }
  return fmt::to_string(out);
}

}  // namespace chaoslab::analysis
