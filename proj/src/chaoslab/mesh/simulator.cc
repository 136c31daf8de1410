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

#include "chaoslab/mesh/simulator.h"

#include <cmath>
#include <utility>

namespace chaoslab::mesh {

using resilience::AsyncCall;
using resilience::CallCompletion;
using resilience::CallResult;
using resilience::CommandOutcome;
using resilience::ErrorClass;
using resilience::OutcomeKind;
using telemetry::MetricId;
using telemetry::Outcome;

namespace {

// Keeps the traffic and mesh streams apart for the same seed.
constexpr uint64_t kMeshStreamSalt = 0x6d657368'73696d31ULL;

}  // namespace

std::string_view RequestOutcomeName(RequestOutcomeKind kind) {
  switch (kind) {
    case RequestOutcomeKind::kSuccess:
      return "success";
    case RequestOutcomeKind::kDegraded:
      return "degraded";
    case RequestOutcomeKind::kFailure:
      return "failure";
  }
  return "failure";
}

std::string_view MeshEventName(MeshEventKind kind) {
  switch (kind) {
    case MeshEventKind::kArrive:
      return "arrive";
    case MeshEventKind::kReject:
      return "reject";
    case MeshEventKind::kDepart:
      return "depart";
  }
  return "arrive";
}

nlohmann::json SimulationSummary::ToJson() const {
  return nlohmann::json{{"requests", requests},
                        {"success", success},
                        {"degraded", degraded},
                        {"failure", failure},
                        {"requests_by_group", requests_by_group},
                        {"end_time_ms", ToWireMillis(end_time)},
                        {"events", events}};
}

struct MeshSimulator::Request {
  RequestContext ctx;
  std::vector<HopRecord> hops;
  std::function<void(const RequestOutcome&)> done;
  bool finished = false;
};

MeshSimulator::MeshSimulator(const Topology& topology, EventLoop& loop,
                             routing::TrafficRouter& router,
                             const routing::ServerGroupRegistry& groups,
                             injection::FaultInjector& injector,
                             resilience::CommandExecutor& executor,
                             telemetry::MetricsStore& metrics, uint64_t seed)
    : topology_(topology),
      loop_(loop),
      router_(router),
      groups_(groups),
      injector_(injector),
      executor_(executor),
      metrics_(metrics),
      traffic_rng_(seed),
      mesh_rng_(seed ^ kMeshStreamSalt),
      entry_(topology.IndexOf(topology.entry)) {
  for (const auto& svc : topology_.services) {
    state_.push_back(std::make_unique<ServiceState>());
    std::vector<int> targets;
    std::vector<int> alternates;
    for (const auto& e : svc.dependencies) {
      targets.push_back(topology_.IndexOf(e.target));
      alternates.push_back(e.fallback.alternate_target
                               ? topology_.IndexOf(*e.fallback.alternate_target)
                               : -1);
    }
    edge_targets_.push_back(std::move(targets));
    edge_alternates_.push_back(std::move(alternates));
  }
}

RequestContext MeshSimulator::MakeContext(uint64_t user_id) {
  RequestContext ctx;
  ctx.request_id = next_request_id_++;
  ctx.user_id = user_id;
  ctx.server_group = router_.Route(topology_.routed_cluster, user_id);
  ctx.start_time = loop_.Now();
  if (auto group = groups_.Find(ctx.server_group);
      group && group->kind == routing::GroupKind::kExperiment) {
    ctx.experiment_tag = group->experiment_id;
  }
  metrics_.Increment({ctx.server_group, std::string(telemetry::kRequestsMetric), Outcome::kNone},
                     loop_.Now());
  ++summary_.requests;
  ++summary_.requests_by_group[ctx.server_group];
  return ctx;
}

void MeshSimulator::StartRequest(uint64_t user_id,
                                 std::function<void(const RequestOutcome&)> done) {
  StartRequest(MakeContext(user_id), std::move(done));
}

void MeshSimulator::StartRequest(RequestContext ctx,
                                 std::function<void(const RequestOutcome&)> done) {
  auto req = std::make_shared<Request>();
  req->ctx = std::move(ctx);
  req->ctx.start_time = loop_.Now();
  req->done = std::move(done);
  Hop(req, entry_, [this, req](CallResult result) { FinishRequest(req, result); });
}

RequestOutcome MeshSimulator::ExecuteRequest(uint64_t user_id) {
  return ExecuteRequest(MakeContext(user_id));
}

RequestOutcome MeshSimulator::ExecuteRequest(RequestContext ctx) {
  bool finished = false;
  RequestOutcome out;
  StartRequest(std::move(ctx), [&](const RequestOutcome& o) {
    out = o;
    finished = true;
  });
  while (!finished && loop_.Step()) {
  }
  return out;
}

void MeshSimulator::FinishRequest(const std::shared_ptr<Request>& req, CallResult result) {
  const Millis now = loop_.Now();
  req->finished = true;
  RequestOutcome out;
  out.kind = !result.ok         ? RequestOutcomeKind::kFailure
             : result.degraded ? RequestOutcomeKind::kDegraded
                               : RequestOutcomeKind::kSuccess;
  out.latency_ms = now - req->ctx.start_time;

  const std::string& group = req->ctx.server_group;
  const std::string requests(telemetry::kRequestsMetric);
  switch (out.kind) {
    case RequestOutcomeKind::kSuccess:
      ++summary_.success;
      metrics_.Increment({group, requests, Outcome::kSuccess}, now);
      break;
    case RequestOutcomeKind::kDegraded:
      ++summary_.degraded;
      metrics_.Increment({group, requests, Outcome::kDegraded}, now);
      break;
    case RequestOutcomeKind::kFailure:
      ++summary_.failure;
      metrics_.Increment({group, requests, Outcome::kFailed}, now);
      break;
  }
  // A degraded response still streams.
  if (out.kind != RequestOutcomeKind::kFailure) {
    metrics_.Increment({group, std::string(telemetry::kSpsMetric), Outcome::kNone}, now);
  }

  if (req->done) {
    out.ctx = req->ctx;
    out.hops = std::move(req->hops);
    auto done = std::move(req->done);
    req->done = nullptr;
    done(out);
  }
}

bool MeshSimulator::TryAcquire(int service) {
  const std::optional<uint32_t>& cap = topology_.services[service].capacity;
  ServiceState& st = *state_[service];
  int64_t cur = st.in_flight.load();
  do {
    if (cap && cur >= static_cast<int64_t>(*cap)) return false;
  } while (!st.in_flight.compare_exchange_weak(cur, cur + 1));
  int64_t peak = st.peak.load();
  while (cur + 1 > peak && !st.peak.compare_exchange_weak(peak, cur + 1)) {
  }
  return true;
}

void MeshSimulator::Release(int service) { state_[service]->in_flight.fetch_sub(1); }

int64_t MeshSimulator::InFlight(std::string_view service) const {
  const int i = topology_.IndexOf(service);
  return i < 0 ? 0 : state_[i]->in_flight.load();
}

int64_t MeshSimulator::PeakInFlight(std::string_view service) const {
  const int i = topology_.IndexOf(service);
  return i < 0 ? 0 : state_[i]->peak.load();
}

void MeshSimulator::Log(MeshEventKind kind, int service, const Request& req) {
  if (!log_events_) return;
  event_log_.push_back({loop_.Now(), kind, topology_.services[service].name,
                        state_[service]->in_flight.load(), req.ctx.request_id, req.ctx.user_id,
                        req.ctx.server_group, req.ctx.experiment_tag});
}

void MeshSimulator::Hop(const std::shared_ptr<Request>& req, int service, CallCompletion done) {
  const Millis now = loop_.Now();
  const ServiceSpec& svc = topology_.services[service];
  const std::string metric = telemetry::ServiceMetric(svc.name);
  metrics_.Increment({req->ctx.server_group, metric, Outcome::kNone}, now);

  if (!TryAcquire(service)) {
    metrics_.Increment({req->ctx.server_group, metric, Outcome::kOverload}, now);
    Log(MeshEventKind::kReject, service, *req);
    if (!req->finished) req->hops.push_back({svc.name, now, now, false, false, true});
    done(CallResult{false, ErrorClass::kOverload, false});
    return;
  }
  Log(MeshEventKind::kArrive, service, *req);

  const Millis latency = svc.latency.Sample(mesh_rng_);
  const bool fails = mesh_rng_.Bernoulli(svc.intrinsic_error_rate);
  loop_.Schedule(now + latency, [this, req, service, now, fails, done = std::move(done)]() mutable {
    if (fails) {
      Depart(req, service, now, CallResult{false, ErrorClass::kIntrinsicError, false},
             std::move(done));
      return;
    }
    WalkEdges(req, service, 0, false, now, std::move(done));
  });
}

void MeshSimulator::WalkEdges(const std::shared_ptr<Request>& req, int service, size_t edge,
                              bool degraded, Millis arrived, CallCompletion done) {
  const ServiceSpec& svc = topology_.services[service];
  if (edge == svc.dependencies.size()) {
    Depart(req, service, arrived, CallResult{true, ErrorClass::kIntrinsicError, degraded},
           std::move(done));
    return;
  }
  const CallEdge& e = svc.dependencies[edge];

  std::optional<CallEffect> effect;
  const injection::InjectionPoint point{svc.name, e.command_name, e.target};
  if (auto treatment = injector_.ShouldInject(req->ctx, point, mesh_rng_)) {
    effect = injection::ApplyTreatment(*treatment);
    req->ctx.injected_treatments.push_back(
        {svc.name, e.command_name, std::string(injection::TreatmentKindName(treatment->kind)),
         loop_.Now()});
  }

  const int target = edge_targets_[service][edge];
  AsyncCall primary = [this, req, target](CallCompletion c) { Hop(req, target, std::move(c)); };
  AsyncCall alternate;
  if (const int alt = edge_alternates_[service][edge]; alt >= 0) {
    alternate = [this, req, alt](CallCompletion c) { Hop(req, alt, std::move(c)); };
  }

  executor_.Execute(
      e.command, req->ctx, effect, std::move(primary), e.fallback, std::move(alternate),
      [this, req, service, edge, degraded, arrived,
       done = std::move(done)](const CommandOutcome& outcome) mutable {
        if (outcome.kind == OutcomeKind::kFallbackFailure) {
          // The caller sees an ordinary error from this service.
          Depart(req, service, arrived, CallResult{false, ErrorClass::kIntrinsicError, false},
                 std::move(done));
          return;
        }
        const bool now_degraded = degraded || outcome.kind == OutcomeKind::kFallbackSuccess ||
                                  outcome.downstream_degraded;
        WalkEdges(req, service, edge + 1, now_degraded, arrived, std::move(done));
      });
}

void MeshSimulator::Depart(const std::shared_ptr<Request>& req, int service, Millis arrived,
                           CallResult result, CallCompletion done) {
  Release(service);
  Log(MeshEventKind::kDepart, service, *req);
  if (!req->finished) {
    req->hops.push_back({topology_.services[service].name, arrived, loop_.Now(), result.ok,
                         result.degraded, false});
  }
  done(result);
}

void MeshSimulator::ScheduleTraffic(const TrafficPlan& plan, Millis start) {
  traffic_stopped_ = false;
  const uint64_t n = static_cast<uint64_t>(std::floor(plan.rate_per_s * plan.duration_s + 1e-9));
  ScheduleUniformArrival(start, start + plan.duration_s * kMillisPerSecond, n, plan.users);
}

void MeshSimulator::ScheduleUniformArrival(Millis prev, Millis end, uint64_t remaining,
                                           uint64_t users) {
  if (remaining == 0 || traffic_stopped_) return;
  // Next of `remaining` sorted uniforms on [prev, end): the minimum of k
  // uniforms is prev + (end - prev) * (1 - U^(1/k)).
  const double u = 1.0 - traffic_rng_.NextDouble();  // (0, 1]
  const Millis at =
      prev + (end - prev) * (1.0 - std::pow(u, 1.0 / static_cast<double>(remaining)));
  const uint64_t user = 1 + traffic_rng_.NextBelow(users);
  loop_.Schedule(at, [this, at, end, remaining, users, user] {
    if (traffic_stopped_) return;
    StartRequest(user);
    ScheduleUniformArrival(at, end, remaining - 1, users);
  });
}

void MeshSimulator::SchedulePoissonTraffic(double rate_per_s, uint64_t users, Millis start) {
  traffic_stopped_ = false;
  SchedulePoissonArrival(start, rate_per_s, users);
}

void MeshSimulator::SchedulePoissonArrival(Millis prev, double rate_per_s, uint64_t users) {
  if (traffic_stopped_) return;
  const double u = 1.0 - traffic_rng_.NextDouble();  // (0, 1]
  const Millis at = prev - std::log(u) / rate_per_s * kMillisPerSecond;
  const uint64_t user = 1 + traffic_rng_.NextBelow(users);
  loop_.Schedule(at, [this, at, rate_per_s, users, user] {
    if (traffic_stopped_) return;
    StartRequest(user);
    SchedulePoissonArrival(at, rate_per_s, users);
  });
}

SimulationSummary MeshSimulator::RunTraffic(const TrafficPlan& plan) {
  ScheduleTraffic(plan, loop_.Now());
  loop_.Run();
  summary_.end_time = loop_.Now();
  summary_.events = loop_.processed();
  return summary_;
}

}  // namespace chaoslab::mesh
