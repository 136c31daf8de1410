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


#include <map>
#include <memory>
#include <string>

#include <gtest/gtest.h>

#include "chaoslab/mesh/simulator.h"
#include "chaoslab/orchestration/platform.h"

namespace chaoslab::mesh {
namespace {

using orchestration::Platform;
using routing::GroupKind;
using telemetry::Outcome;

std::unique_ptr<Platform> Make(const std::string& scenario, uint64_t seed = 42) {
  auto t = LoadTopologyFile(std::string(CHAOSLAB_SCENARIO_DIR) + "/" + scenario + ".yaml");
  EXPECT_TRUE(t.ok()) << t.status();
  auto p = Platform::Create(*t, {.seed = seed});
  EXPECT_TRUE(p.ok()) << p.status();
  return *std::move(p);
}

// Splits API traffic three ways with experiment groups registered by hand.
void SplitGallery(Platform& p, double f) {
  ASSERT_TRUE(p.groups().Add({"api-chap-control", "API", GroupKind::kControl, "v1",
                              std::string("exp")}).ok());
  ASSERT_TRUE(p.groups().Add({"api-chap-experiment", "API", GroupKind::kExperiment, "v1",
                              std::string("exp")}).ok());
  ASSERT_TRUE(p.router()
                  .Update("API",
                          {{"api", 1 - f}, {"api-chap-control", f / 2}, {"api-chap-experiment", f / 2}},
                          std::string("exp"))
                  .ok());
}

TEST(SimulatorTest, ExactRequestCount) {
  auto p = Make("gallery");
  SimulationSummary s = p->mesh().RunTraffic({100, 10, 1000});
  EXPECT_EQ(s.requests, 1000u);
  EXPECT_EQ(s.success + s.degraded + s.failure, 1000u);
  EXPECT_EQ(p->metrics().LifetimeTotal({"api", "requests", Outcome::kNone}), 1000u);
  EXPECT_LT(s.end_time, 10'000 + 5'000);
}

TEST(SimulatorTest, ContextCarriesGroupAndTag) {
  auto p = Make("gallery");
  SplitGallery(*p, 0.5);
  injection::InjectionRule rule;
  rule.experiment_id = "exp";
  rule.points = {{"API", "GetGallery", "Gallery"}};
  rule.scope_group = "api-chap-experiment";
  ASSERT_TRUE(p->injector().Arm(rule).ok());

  std::map<std::string, int> seen;
  for (uint64_t u = 1; u <= 400; ++u) {
    RequestOutcome out = p->mesh().ExecuteRequest(u);
    ++seen[out.ctx.server_group];
    EXPECT_EQ(out.ctx.user_id, u);
    EXPECT_EQ(out.ctx.server_group, routing::AssignGroup(*p->router().Table("API"), u));
    const bool experiment = out.ctx.server_group == "api-chap-experiment";
    EXPECT_EQ(out.ctx.experiment_tag.has_value(), experiment);
    if (experiment) {
      EXPECT_EQ(*out.ctx.experiment_tag, "exp");
      ASSERT_EQ(out.ctx.injected_treatments.size(), 1u);
      EXPECT_EQ(out.ctx.injected_treatments[0].caller, "API");
      EXPECT_EQ(out.ctx.injected_treatments[0].command, "GetGallery");
      // Static fallback: the page still renders.
      EXPECT_EQ(out.kind, RequestOutcomeKind::kDegraded);
    } else {
      EXPECT_TRUE(out.ctx.injected_treatments.empty());
    }
    ASSERT_FALSE(out.hops.empty());
  }
  EXPECT_GT(seen["api-chap-experiment"], 50);
  EXPECT_GT(seen["api-chap-control"], 50);
  EXPECT_EQ(p->metrics().LifetimeTotal({"api-chap-control", "GetGallery", Outcome::kInjectedError}),
            0u);
}

TEST(SimulatorTest, SameSeedSameRun) {
  auto a = Make("cascade", 7);
  auto b = Make("cascade", 7);
  auto c = Make("cascade", 8);
  const TrafficPlan plan{200, 20, 1000};
  const auto sa = a->mesh().RunTraffic(plan).ToJson();
  EXPECT_EQ(sa, b->mesh().RunTraffic(plan).ToJson());
  (void)c->mesh().RunTraffic(plan);
  EXPECT_EQ(a->metrics().TakeSnapshot(0, 30000).ToJson(), b->metrics().TakeSnapshot(0, 30000).ToJson());
  EXPECT_NE(a->metrics().TakeSnapshot(0, 30000).ToJson(), c->metrics().TakeSnapshot(0, 30000).ToJson());
}

// Capacity is a hard bound; a rejection only ever happens when the service
// is full.
TEST(SimulatorTest, CapacityNeverExceeded) {
  auto p = Make("cascade");
  p->mesh().set_event_log_enabled(true);
  (void)p->mesh().RunTraffic({200, 30, 1000});
  const uint32_t cap = *p->topology().Find("C")->capacity;
  uint64_t rejects = 0;
  std::map<std::string, int64_t> replay;
  for (const MeshEvent& e : p->mesh().event_log()) {
    if (e.service == "C") {
      ASSERT_LE(e.in_flight, static_cast<int64_t>(cap));
      if (e.kind == MeshEventKind::kReject) {
        ++rejects;
        ASSERT_EQ(e.in_flight, static_cast<int64_t>(cap));
      }
    }
    // Independent replay of arrivals and departures.
    if (e.kind == MeshEventKind::kArrive) ++replay[e.service];
    if (e.kind == MeshEventKind::kDepart) --replay[e.service];
    ASSERT_EQ(replay[e.service], e.in_flight) << e.service;
  }
  EXPECT_GT(rejects, 0u);
  EXPECT_LE(p->mesh().PeakInFlight("C"), static_cast<int64_t>(cap));
  uint64_t overload = 0;
  for (const auto& id : p->metrics().ListMetrics()) {
    if (id.name == telemetry::ServiceMetric("C") && id.outcome == Outcome::kOverload) {
      overload += p->metrics().LifetimeTotal(id);
    }
  }
  EXPECT_EQ(overload, rejects);
}

TEST(SimulatorTest, NoRejectionsWellBelowCapacity) {
  auto p = Make("cascade");
  p->mesh().set_event_log_enabled(true);
  (void)p->mesh().RunTraffic({10, 30, 1000});
  EXPECT_LT(p->mesh().PeakInFlight("C"), 10);
  for (const MeshEvent& e : p->mesh().event_log()) ASSERT_NE(e.kind, MeshEventKind::kReject);
}

TEST(SimulatorTest, BurstPastCapacityMostlyFails) {
  auto p = Make("cascade");
  std::map<RequestOutcomeKind, int> outcomes;
  for (uint64_t u = 1; u <= 100; ++u) {
    p->mesh().StartRequest(u, [&](const RequestOutcome& o) { ++outcomes[o.kind]; });
  }
  p->loop().Run();
  EXPECT_EQ(outcomes[RequestOutcomeKind::kSuccess] + outcomes[RequestOutcomeKind::kDegraded] +
                outcomes[RequestOutcomeKind::kFailure],
            100);
  EXPECT_GT(outcomes[RequestOutcomeKind::kFailure], 50);
  EXPECT_EQ(p->mesh().InFlight("C"), 0);
}

TEST(SimulatorTest, BurstWithHealthyFallbackDegrades) {
  auto p = Make("cascade-healthy");
  std::map<RequestOutcomeKind, int> outcomes;
  for (uint64_t u = 1; u <= 100; ++u) {
    p->mesh().StartRequest(u, [&](const RequestOutcome& o) { ++outcomes[o.kind]; });
  }
  p->loop().Run();
  EXPECT_EQ(outcomes[RequestOutcomeKind::kFailure], 0);
  EXPECT_GT(outcomes[RequestOutcomeKind::kDegraded], 50);
}

TEST(SimulatorTest, EveryCommandExecutionHasOneOutcome) {
  auto p = Make("cascade");
  (void)p->mesh().RunTraffic({200, 20, 1000});
  for (const auto& [key, n] : p->executor().AllExecutions()) {
    const auto& [group, command] = key;
    const uint64_t total = p->metrics().LifetimeTotal({group, command, Outcome::kSuccess}) +
                           p->metrics().LifetimeTotal({group, command, Outcome::kFallbackSuccess}) +
                           p->metrics().LifetimeTotal({group, command, Outcome::kFallbackFailure});
    EXPECT_EQ(total, n) << group << " " << command;
  }
}

}  // namespace
}  // namespace chaoslab::mesh
