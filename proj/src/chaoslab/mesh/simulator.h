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

// Discrete-event mesh: generates user requests, routes them at the front
// door, and walks the call graph through the command executor.

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chaoslab/common/event_loop.h"
#include "chaoslab/common/random.h"
#include "chaoslab/common/request_context.h"
#include "chaoslab/injection/fault_injector.h"
#include "chaoslab/mesh/topology.h"
#include "chaoslab/resilience/command.h"
#include "chaoslab/routing/router.h"
#include "chaoslab/telemetry/metrics_store.h"

namespace chaoslab::mesh {

enum class RequestOutcomeKind : uint8_t { kSuccess, kDegraded, kFailure };

std::string_view RequestOutcomeName(RequestOutcomeKind kind);

struct HopRecord {
  std::string service;
  Millis arrived = 0;
  Millis departed = 0;
  bool ok = false;
  bool degraded = false;
  bool rejected = false;  // over capacity
};

struct RequestOutcome {
  RequestOutcomeKind kind = RequestOutcomeKind::kSuccess;
  Millis latency_ms = 0;
  RequestContext ctx;
  // Hops in departure order; orphaned hops (whose caller timed out) that
  // finish after the request are not included.
  std::vector<HopRecord> hops;
};

enum class MeshEventKind : uint8_t { kArrive, kReject, kDepart };

std::string_view MeshEventName(MeshEventKind kind);

// One entry of the optional event log.
struct MeshEvent {
  Millis at = 0;
  MeshEventKind kind = MeshEventKind::kArrive;
  std::string service;
  int64_t in_flight = 0;  // after the event
  uint64_t request_id = 0;
  uint64_t user_id = 0;
  std::string server_group;
  std::optional<std::string> experiment_tag;
};

struct SimulationSummary {
  uint64_t requests = 0;
  uint64_t success = 0;
  uint64_t degraded = 0;
  uint64_t failure = 0;
  std::map<std::string, uint64_t> requests_by_group;
  Millis end_time = 0;
  uint64_t events = 0;

  nlohmann::json ToJson() const;
};

// Runs on a caller-owned event loop; everything happens on the loop's clock.
// Two independent random streams are derived from the seed: one for traffic
// (arrival times and users) and one for the mesh (latencies, intrinsic
// errors and injection fractions), so changing the mesh does not reshuffle
// the traffic.
class MeshSimulator {
 public:
  MeshSimulator(const Topology& topology, EventLoop& loop, routing::TrafficRouter& router,
                const routing::ServerGroupRegistry& groups, injection::FaultInjector& injector,
                resilience::CommandExecutor& executor, telemetry::MetricsStore& metrics,
                uint64_t seed);

  MeshSimulator(const MeshSimulator&) = delete;
  MeshSimulator& operator=(const MeshSimulator&) = delete;

  // Routes the user at the front door and counts the routed request.
  RequestContext MakeContext(uint64_t user_id);

  // Sends a request into the entry service now.
  void StartRequest(uint64_t user_id, std::function<void(const RequestOutcome&)> done = nullptr);
  void StartRequest(RequestContext ctx, std::function<void(const RequestOutcome&)> done);

  // Starts a request and steps the loop until it completes.
  RequestOutcome ExecuteRequest(uint64_t user_id);
  RequestOutcome ExecuteRequest(RequestContext ctx);

  // Schedules exactly floor(rate * duration) arrivals, spread uniformly at
  // random over [start, start + duration), users uniform on [1, users].
  void ScheduleTraffic(const TrafficPlan& plan, Millis start);
  // Open-ended Poisson arrivals from `start` until StopTraffic.
  void SchedulePoissonTraffic(double rate_per_s, uint64_t users, Millis start);
  void StopTraffic() { traffic_stopped_ = true; }

  // ScheduleTraffic from now, then drains the loop.
  SimulationSummary RunTraffic(const TrafficPlan& plan);

  void set_event_log_enabled(bool enabled) { log_events_ = enabled; }
  const std::vector<MeshEvent>& event_log() const { return event_log_; }

  int64_t InFlight(std::string_view service) const;
  int64_t PeakInFlight(std::string_view service) const;

  const SimulationSummary& summary() const { return summary_; }
  const Topology& topology() const { return topology_; }

 private:
  struct Request;
  struct ServiceState {
    std::atomic<int64_t> in_flight{0};
    std::atomic<int64_t> peak{0};
  };

  void Hop(const std::shared_ptr<Request>& req, int service, resilience::CallCompletion done);
  void WalkEdges(const std::shared_ptr<Request>& req, int service, size_t edge, bool degraded,
                 Millis arrived, resilience::CallCompletion done);
  void Depart(const std::shared_ptr<Request>& req, int service, Millis arrived,
              resilience::CallResult result, resilience::CallCompletion done);
  bool TryAcquire(int service);
  void Release(int service);
  void Log(MeshEventKind kind, int service, const Request& req);
  void FinishRequest(const std::shared_ptr<Request>& req, resilience::CallResult result);
  void ScheduleUniformArrival(Millis prev, Millis end, uint64_t remaining, uint64_t users);
  void SchedulePoissonArrival(Millis prev, double rate_per_s, uint64_t users);

  const Topology& topology_;
  EventLoop& loop_;
  routing::TrafficRouter& router_;
  const routing::ServerGroupRegistry& groups_;
  injection::FaultInjector& injector_;
  resilience::CommandExecutor& executor_;
  telemetry::MetricsStore& metrics_;
  Rng traffic_rng_;
  Rng mesh_rng_;
  int entry_;
  std::vector<std::unique_ptr<ServiceState>> state_;
  std::vector<std::vector<int>> edge_targets_;
  std::vector<std::vector<int>> edge_alternates_;  // -1 when none
  uint64_t next_request_id_ = 1;
  bool traffic_stopped_ = false;
  bool log_events_ = false;
  std::vector<MeshEvent> event_log_;
  SimulationSummary summary_;
};

}  // namespace chaoslab::mesh
