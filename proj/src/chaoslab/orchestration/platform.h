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


// Everything one simulated deployment needs, wired together: the mesh, its
// clock, telemetry, routing, injection and the orchestrator.

#pragma once

#include <cstdint>
#include <memory>

#include "absl/status/statusor.h"
#include "chaoslab/common/event_loop.h"
#include "chaoslab/injection/fault_injector.h"
#include "chaoslab/mesh/simulator.h"
#include "chaoslab/mesh/topology.h"
#include "chaoslab/orchestration/orchestrator.h"
#include "chaoslab/resilience/command.h"
#include "chaoslab/routing/router.h"
#include "chaoslab/telemetry/metrics_store.h"

namespace chaoslab::orchestration {

inline constexpr char kBaselineSoftwareVersion[] = "v1";

struct PlatformOptions {
  uint64_t seed = 42;
  Millis bucket_width_ms = 1000;
  double max_divert = kDefaultMaxDivert;
};

class Platform {
 public:
  // Validates the topology, registers a baseline group per service and routes
  // the front-door cluster entirely to its baseline.
  static absl::StatusOr<std::unique_ptr<Platform>> Create(mesh::Topology topology,
                                                          PlatformOptions options = {});

  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  const mesh::Topology& topology() const { return topology_; }
  const PlatformOptions& options() const { return options_; }
  EventLoop& loop() { return loop_; }
  telemetry::MetricsStore& metrics() { return metrics_; }
  routing::ServerGroupRegistry& groups() { return groups_; }
  routing::TrafficRouter& router() { return router_; }
  injection::FaultInjector& injector() { return injector_; }
  resilience::CommandExecutor& executor() { return executor_; }
  mesh::MeshSimulator& mesh() { return mesh_; }
  Orchestrator& orchestrator() { return orchestrator_; }

 private:
  Platform(mesh::Topology topology, PlatformOptions options);

  const mesh::Topology topology_;
  const PlatformOptions options_;
  EventLoop loop_;
  telemetry::MetricsStore metrics_;
  routing::ServerGroupRegistry groups_;
  routing::TrafficRouter router_;
  injection::FaultInjector injector_;
  resilience::CommandExecutor executor_;
  mesh::MeshSimulator mesh_;
  Orchestrator orchestrator_;
};

}  // namespace chaoslab::orchestration
