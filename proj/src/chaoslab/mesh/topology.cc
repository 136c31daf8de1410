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

#include "chaoslab/mesh/topology.h"

#include <cmath>
#include <map>
#include <set>

#include "chaoslab/common/document.h"
#include "chaoslab/common/status_macros.h"
#include "chaoslab/common/strings.h"
#include "chaoslab/routing/router.h"

namespace chaoslab::mesh {
namespace {

using nlohmann::json;
using resilience::CommandConfig;
using resilience::FallbackKind;
using resilience::FallbackSpec;

absl::StatusOr<LatencySpec> ParseLatency(const json& obj, const std::string& where) {
  auto it = obj.find("base_latency_ms");
  if (it == obj.end() || it->is_null()) {
    return CodedError("missing_field", StrCat(where, ".base_latency_ms"));
  }
  LatencySpec spec;
  if (it->is_number()) {
    spec.min_ms = spec.max_ms = it->get<double>();
    return spec;
  }
  const std::string inner = StrCat(where, ".base_latency_ms");
  CHAOSLAB_ASSIGN_OR_RETURN(spec.min_ms, RequireNumber(*it, "min", inner));
  CHAOSLAB_ASSIGN_OR_RETURN(spec.max_ms, RequireNumber(*it, "max", inner));
  return spec;
}

absl::StatusOr<std::optional<uint32_t>> ParseCapacity(const json& obj, const std::string& where) {
  auto it = obj.find("capacity");
  if (it == obj.end() || it->is_null()) return std::optional<uint32_t>();
  if (it->is_string() && it->get<std::string>() == "unbounded") return std::optional<uint32_t>();
  if (!it->is_number_integer()) {
    return CodedError("invalid_capacity",
                      StrCat(where, ".capacity must be a positive integer or \"unbounded\""));
  }
  const int64_t cap = it->get<int64_t>();
  if (cap < 1 || cap > UINT32_MAX) {
    return CodedError("invalid_capacity", StrCat(where, ".capacity must be >= 1"));
  }
  return std::optional<uint32_t>(static_cast<uint32_t>(cap));
}

absl::StatusOr<CallEdge> ParseEdge(const json& obj, const std::string& where) {
  CallEdge edge;
  CHAOSLAB_ASSIGN_OR_RETURN(edge.command_name, RequireString(obj, "command_name", where));
  CHAOSLAB_ASSIGN_OR_RETURN(edge.target, RequireString(obj, "target", where));
  CHAOSLAB_ASSIGN_OR_RETURN(std::string crit,
                            OptionalString(obj, "criticality", "critical", where));
  if (crit == "critical") {
    edge.criticality = Criticality::kCritical;
  } else if (crit == "non-critical" || crit == "non_critical") {
    edge.criticality = Criticality::kNonCritical;
  } else {
    return CodedError("invalid_field", StrCat(where, ".criticality: unknown value ", crit));
  }

  auto fb = obj.find("fallback");
  if (fb == obj.end() || fb->is_null()) {
    return CodedError("missing_field", StrCat(where, ".fallback"));
  }
  const std::string fb_where = StrCat(where, ".fallback");
  CHAOSLAB_ASSIGN_OR_RETURN(std::string kind, RequireString(*fb, "kind", fb_where));
  std::optional<FallbackKind> parsed = resilience::ParseFallbackKind(kind);
  if (!parsed) return CodedError("invalid_fallback", StrCat(fb_where, ": unknown kind ", kind));
  edge.fallback.kind = *parsed;
  if (fb->contains("alternate_target") && !(*fb)["alternate_target"].is_null()) {
    CHAOSLAB_ASSIGN_OR_RETURN(edge.fallback.alternate_target,
                              RequireString(*fb, "alternate_target", fb_where));
  }

  CommandConfig& cmd = edge.command;
  cmd.command_name = edge.command_name;
  CHAOSLAB_ASSIGN_OR_RETURN(cmd.timeout_ms, OptionalNumber(obj, "timeout_ms", cmd.timeout_ms, where));
  CHAOSLAB_ASSIGN_OR_RETURN(cmd.breaker_error_threshold,
                            OptionalNumber(obj, "breaker_error_threshold",
                                           cmd.breaker_error_threshold, where));
  CHAOSLAB_ASSIGN_OR_RETURN(cmd.breaker_window_ms,
                            OptionalNumber(obj, "breaker_window_ms", cmd.breaker_window_ms, where));
  CHAOSLAB_ASSIGN_OR_RETURN(int64_t volume, OptionalInteger(obj, "breaker_min_volume",
                                                            cmd.breaker_min_volume, where));
  if (volume < 1 || volume > UINT32_MAX) {
    return CodedError("invalid_command_config",
                      StrCat(where, ".breaker_min_volume must be >= 1"));
  }
  cmd.breaker_min_volume = static_cast<uint32_t>(volume);
  CHAOSLAB_ASSIGN_OR_RETURN(cmd.breaker_cooldown_ms,
                            OptionalNumber(obj, "breaker_cooldown_ms", cmd.breaker_cooldown_ms,
                                           where));
  return edge;
}

absl::StatusOr<ServiceSpec> ParseService(const json& obj, const std::string& where) {
  ServiceSpec svc;
  CHAOSLAB_ASSIGN_OR_RETURN(svc.name, RequireString(obj, "name", where));
  CHAOSLAB_ASSIGN_OR_RETURN(svc.latency, ParseLatency(obj, where));
  CHAOSLAB_ASSIGN_OR_RETURN(svc.intrinsic_error_rate,
                            OptionalNumber(obj, "intrinsic_error_rate", 0.0, where));
  CHAOSLAB_ASSIGN_OR_RETURN(svc.capacity, ParseCapacity(obj, where));
  auto deps = obj.find("dependencies");
  if (deps != obj.end() && !deps->is_null()) {
    if (!deps->is_array()) {
      return CodedError("invalid_field", StrCat(where, ".dependencies must be a list"));
    }
    for (size_t i = 0; i < deps->size(); ++i) {
      CHAOSLAB_ASSIGN_OR_RETURN(
          CallEdge edge, ParseEdge((*deps)[i], StrCat(where, ".dependencies[", i, "]")));
      svc.dependencies.push_back(std::move(edge));
    }
  }
  return svc;
}

json LatencyToJson(const LatencySpec& l) {
  if (l.fixed()) return l.min_ms;
  return json{{"min", l.min_ms}, {"max", l.max_ms}};
}

}  // namespace

std::string_view CriticalityName(Criticality c) {
  return c == Criticality::kCritical ? "critical" : "non-critical";
}

const CallEdge* ServiceSpec::FindEdge(std::string_view command_name) const {
  for (const auto& e : dependencies) {
    if (e.command_name == command_name) return &e;
  }
  return nullptr;
}

const ServiceSpec* Topology::Find(std::string_view service) const {
  const int i = IndexOf(service);
  return i < 0 ? nullptr : &services[i];
}

int Topology::IndexOf(std::string_view service) const {
  for (size_t i = 0; i < services.size(); ++i) {
    if (services[i].name == service) return static_cast<int>(i);
  }
  return -1;
}

absl::Status ValidateTrafficPlan(const TrafficPlan& plan) {
  if (!(plan.rate_per_s > 0) || !std::isfinite(plan.rate_per_s)) {
    return CodedError("invalid_traffic", "rate_per_s must be > 0");
  }
  if (!(plan.duration_s > 0) || !std::isfinite(plan.duration_s)) {
    return CodedError("invalid_traffic", "duration_s must be > 0");
  }
  if (plan.users < 1) return CodedError("invalid_traffic", "users must be >= 1");
  return absl::OkStatus();
}

absl::Status ValidateTopology(const Topology& topology) {
  if (topology.services.empty()) return CodedError("invalid_field", "services must be non-empty");
  if (topology.routing_hash != routing::kRoutingHashName) {
    return CodedError("unsupported_routing_hash",
                      StrCat(topology.routing_hash, " (supported: ",
                                   routing::kRoutingHashName, ")"));
  }

  std::map<std::string, size_t> index;
  for (size_t i = 0; i < topology.services.size(); ++i) {
    const ServiceSpec& s = topology.services[i];
    if (s.name.empty()) return CodedError("invalid_field", "service name must be non-empty");
    if (!index.emplace(s.name, i).second) return CodedError("duplicate_service", s.name);
  }
  // Group names are lowercased service names, so names differing only in
  // case would collide.
  std::set<std::string> lowered;
  for (const auto& s : topology.services) {
    if (!lowered.insert(routing::BaselineGroupName(s.name)).second) {
      return CodedError("duplicate_service", StrCat(s.name, " (case-insensitive)"));
    }
  }

  for (const auto& s : topology.services) {
    if (!(s.intrinsic_error_rate >= 0 && s.intrinsic_error_rate <= 1)) {
      return CodedError("invalid_probability",
                        StrCat(s.name, ".intrinsic_error_rate must be in [0,1]"));
    }
    if (s.capacity && *s.capacity < 1) {
      return CodedError("invalid_capacity", StrCat(s.name, ".capacity must be >= 1"));
    }
    const LatencySpec& l = s.latency;
    if (!(l.min_ms >= 0) || !(l.max_ms >= l.min_ms) || !std::isfinite(l.max_ms)) {
      return CodedError("invalid_latency",
                        StrCat(s.name, ".base_latency_ms needs 0 <= min <= max"));
    }
    std::set<std::string> commands;
    for (const auto& e : s.dependencies) {
      if (!commands.insert(e.command_name).second) {
        return CodedError("duplicate_command", StrCat(s.name, ".", e.command_name));
      }
      if (!index.count(e.target)) {
        return CodedError("dangling_target",
                          StrCat(s.name, ".", e.command_name, " -> ", e.target));
      }
      if (e.command.command_name != e.command_name) {
        return CodedError("invalid_command_config",
                          StrCat(s.name, ".", e.command_name, ": mismatched command name"));
      }
      CHAOSLAB_RETURN_IF_ERROR(resilience::ValidateCommandConfig(e.command));
      CHAOSLAB_RETURN_IF_ERROR(resilience::ValidateFallback(e.fallback));
      if (e.fallback.alternate_target && !index.count(*e.fallback.alternate_target)) {
        return CodedError("dangling_target", StrCat(s.name, ".", e.command_name,
                                                          " fallback -> ",
                                                          *e.fallback.alternate_target));
      }
    }
  }

  // Depth-first search for a cycle; 0 unvisited, 1 on stack, 2 done.
  const size_t n = topology.services.size();
  std::vector<int> color(n, 0);
  std::vector<std::pair<size_t, size_t>> stack;  // (service, next out-edge)
  auto out_edges = [&](size_t i) {
    std::vector<size_t> out;
    for (const auto& e : topology.services[i].dependencies) {
      out.push_back(index.at(e.target));
      if (e.fallback.alternate_target) out.push_back(index.at(*e.fallback.alternate_target));
    }
    return out;
  };
  for (size_t root = 0; root < n; ++root) {
    if (color[root]) continue;
    color[root] = 1;
    stack.push_back({root, 0});
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const std::vector<size_t> out = out_edges(node);
      if (next == out.size()) {
        color[node] = 2;
        stack.pop_back();
        continue;
      }
      const size_t child = out[next++];
      if (color[child] == 1) {
        return CodedError("cyclic_dependency",
                          StrCat(topology.services[node].name, " -> ",
                                       topology.services[child].name, " closes a cycle"));
      }
      if (color[child] == 0) {
        color[child] = 1;
        stack.push_back({child, 0});
      }
    }
  }

  if (!index.count(topology.entry)) return CodedError("unknown_entry", topology.entry);
  if (!index.count(topology.routed_cluster)) {
    return CodedError("unknown_routed_cluster", topology.routed_cluster);
  }
  if (topology.traffic) CHAOSLAB_RETURN_IF_ERROR(ValidateTrafficPlan(*topology.traffic));
  return absl::OkStatus();
}

absl::StatusOr<Topology> TopologyFromJson(const json& doc) {
  CHAOSLAB_RETURN_IF_ERROR(CheckSchemaVersion(doc));
  Topology t;
  CHAOSLAB_ASSIGN_OR_RETURN(t.name, RequireString(doc, "name", ""));
  CHAOSLAB_ASSIGN_OR_RETURN(t.routing_hash, OptionalString(doc, "routing_hash",
                                                           std::string(routing::kRoutingHashName),
                                                           ""));
  auto services = doc.find("services");
  if (services == doc.end() || services->is_null()) return CodedError("missing_field", "services");
  if (!services->is_array()) return CodedError("invalid_field", "services must be a list");
  for (size_t i = 0; i < services->size(); ++i) {
    CHAOSLAB_ASSIGN_OR_RETURN(ServiceSpec svc,
                              ParseService((*services)[i], StrCat("services[", i, "]")));
    t.services.push_back(std::move(svc));
  }
  const std::string first = t.services.empty() ? "" : t.services.front().name;
  CHAOSLAB_ASSIGN_OR_RETURN(t.entry, OptionalString(doc, "entry", first, ""));
  CHAOSLAB_ASSIGN_OR_RETURN(t.routed_cluster, RequireString(doc, "routed_cluster", ""));

  auto traffic = doc.find("traffic");
  if (traffic != doc.end() && !traffic->is_null()) {
    TrafficPlan plan;
    CHAOSLAB_ASSIGN_OR_RETURN(plan.rate_per_s, RequireNumber(*traffic, "rate_per_s", "traffic"));
    CHAOSLAB_ASSIGN_OR_RETURN(plan.duration_s, RequireNumber(*traffic, "duration_s", "traffic"));
    CHAOSLAB_ASSIGN_OR_RETURN(int64_t users, RequireInteger(*traffic, "users", "traffic"));
    if (users < 1) return CodedError("invalid_traffic", "users must be >= 1");
    plan.users = static_cast<uint64_t>(users);
    t.traffic = plan;
  }

  CHAOSLAB_RETURN_IF_ERROR(ValidateTopology(t));
  return t;
}

absl::StatusOr<Topology> LoadTopology(std::string_view text) {
  CHAOSLAB_ASSIGN_OR_RETURN(json doc, ParseDocument(text));
  return TopologyFromJson(doc);
}

absl::StatusOr<Topology> LoadTopologyFile(const std::string& path) {
  CHAOSLAB_ASSIGN_OR_RETURN(json doc, LoadDocumentFile(path));
  auto t = TopologyFromJson(doc);
  if (!t.ok()) {
    return absl::Status(t.status().code(), StrCat(StatusMessage(t.status()), " (in ", path, ")"));
  }
  return t;
}

json TopologyToJson(const Topology& t) {
  json services = json::array();
  for (const auto& s : t.services) {
    json deps = json::array();
    for (const auto& e : s.dependencies) {
      json fb{{"kind", resilience::FallbackKindName(e.fallback.kind)}};
      if (e.fallback.alternate_target) fb["alternate_target"] = *e.fallback.alternate_target;
      deps.push_back({{"command_name", e.command_name},
                      {"target", e.target},
                      {"criticality", CriticalityName(e.criticality)},
                      {"fallback", fb},
                      {"timeout_ms", e.command.timeout_ms},
                      {"breaker_error_threshold", e.command.breaker_error_threshold},
                      {"breaker_window_ms", e.command.breaker_window_ms},
                      {"breaker_min_volume", e.command.breaker_min_volume},
                      {"breaker_cooldown_ms", e.command.breaker_cooldown_ms}});
    }
    json svc{{"name", s.name},
             {"base_latency_ms", LatencyToJson(s.latency)},
             {"intrinsic_error_rate", s.intrinsic_error_rate},
             {"dependencies", deps}};
    if (s.capacity) {
      svc["capacity"] = *s.capacity;
    } else {
      svc["capacity"] = "unbounded";
    }
    services.push_back(std::move(svc));
  }
  json doc{{"schema_version", kSchemaVersion},
           {"name", t.name},
           {"routing_hash", t.routing_hash},
           {"entry", t.entry},
           {"routed_cluster", t.routed_cluster},
           {"services", services}};
  if (t.traffic) {
    doc["traffic"] = {{"rate_per_s", t.traffic->rate_per_s},
                      {"duration_s", t.traffic->duration_s},
                      {"users", t.traffic->users}};
  }
  return doc;
}

}  // namespace chaoslab::mesh
