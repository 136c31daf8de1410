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

// Declarative description of a simulated mesh: services, their latency, error
// and capacity behavior, and the command-wrapped call edges between them.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chaoslab/common/random.h"
#include "chaoslab/common/time.h"
#include "chaoslab/resilience/command_config.h"
#include "json.hpp"

namespace chaoslab::mesh {

// Fixed when min_ms == max_ms, otherwise uniform on [min_ms, max_ms).
struct LatencySpec {
  Millis min_ms = 0;
  Millis max_ms = 0;

  bool fixed() const { return min_ms == max_ms; }
  // A fixed latency consumes no randomness.
  Millis Sample(Rng& rng) const { return fixed() ? min_ms : rng.Uniform(min_ms, max_ms); }
};

enum class Criticality : uint8_t { kCritical, kNonCritical };

std::string_view CriticalityName(Criticality c);

struct CallEdge {
  std::string command_name;
  std::string target;
  Criticality criticality = Criticality::kCritical;
  resilience::FallbackSpec fallback;
  // command.command_name == command_name.
  resilience::CommandConfig command;
};

struct ServiceSpec {
  std::string name;
  LatencySpec latency;
  double intrinsic_error_rate = 0;
  std::optional<uint32_t> capacity;  // nullopt is unbounded
  std::vector<CallEdge> dependencies;

  const CallEdge* FindEdge(std::string_view command_name) const;
};

struct TrafficPlan {
  double rate_per_s = 0;
  double duration_s = 0;
  uint64_t users = 0;
};

absl::Status ValidateTrafficPlan(const TrafficPlan& plan);

struct Topology {
  std::string name;
  std::string routing_hash;
  // Requests enter the mesh here.
  std::string entry;
  // The service whose server groups the front door splits traffic across.
  std::string routed_cluster;
  std::vector<ServiceSpec> services;
  std::optional<TrafficPlan> traffic;

  const ServiceSpec* Find(std::string_view service) const;
  // Index into services, or -1.
  int IndexOf(std::string_view service) const;
};

// Structural checks: unique names, known targets, per-caller unique command
// names, probabilities and capacities in range, acyclic call graph (alternate
// fallback calls included), known entry and routed cluster.
absl::Status ValidateTopology(const Topology& topology);

absl::StatusOr<Topology> TopologyFromJson(const nlohmann::json& doc);
absl::StatusOr<Topology> LoadTopology(std::string_view text);
absl::StatusOr<Topology> LoadTopologyFile(const std::string& path);
nlohmann::json TopologyToJson(const Topology& topology);

}  // namespace chaoslab::mesh
