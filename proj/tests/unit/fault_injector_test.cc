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


#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "chaoslab/common/document.h"
#include "chaoslab/injection/fault_injector.h"

namespace chaoslab::injection {
namespace {

using routing::GroupKind;
using routing::ServerGroup;

const InjectionPoint kPoint{"API", "GetGallery", "Gallery"};

class FaultInjectorTest : public ::testing::Test {
 protected:
  void SetUp() override {
    auto t = mesh::LoadTopologyFile(std::string(CHAOSLAB_SCENARIO_DIR) + "/gallery.yaml");
    ASSERT_TRUE(t.ok()) << t.status();
    topology_ = *t;
    ASSERT_TRUE(groups_.Add({"api", "API", GroupKind::kBaseline, "v1", std::nullopt}).ok());
    ASSERT_TRUE(groups_.Add({"api-chap-control", "API", GroupKind::kControl, "v1",
                             std::string("exp")}).ok());
    ASSERT_TRUE(groups_.Add({"api-chap-experiment", "API", GroupKind::kExperiment, "v1",
                             std::string("exp")}).ok());
    injector_ = std::make_unique<FaultInjector>(topology_, groups_);
  }

  InjectionRule Rule(double fraction = 1.0) {
    InjectionRule r;
    r.experiment_id = "exp";
    r.points = {kPoint};
    r.treatment.kind = TreatmentKind::kError;
    r.treatment.failure_fraction = fraction;
    r.scope_group = "api-chap-experiment";
    return r;
  }

  static RequestContext Ctx(const std::string& group, std::optional<std::string> tag) {
    RequestContext c;
    c.server_group = group;
    c.experiment_tag = std::move(tag);
    return c;
  }

  mesh::Topology topology_;
  routing::ServerGroupRegistry groups_;
  std::unique_ptr<FaultInjector> injector_;
};

TEST_F(FaultInjectorTest, ArmValidatesScopeAndPoints) {
  InjectionRule r = Rule();
  r.scope_group = "api-chap-control";
  EXPECT_EQ(ErrorCode(injector_->Arm(r).status()), "scope_violation");
  r.scope_group = "api";
  EXPECT_EQ(ErrorCode(injector_->Arm(r).status()), "scope_violation");
  r = Rule();
  r.points = {{"API", "GetGallery", "Zuul"}};
  EXPECT_EQ(ErrorCode(injector_->Arm(r).status()), "unknown_point");
  r = Rule();
  r.points.clear();
  EXPECT_EQ(ErrorCode(injector_->Arm(r).status()), "injection_points_empty");
  r = Rule();
  r.treatment.failure_fraction = 0;
  EXPECT_EQ(ErrorCode(injector_->Arm(r).status()), "treatment_invalid");
  EXPECT_TRUE(injector_->Rules().empty());
  EXPECT_EQ(*injector_->Arm(Rule()), "exp");
}

TEST_F(FaultInjectorTest, OnlyTaggedExperimentTrafficIsTouched) {
  ASSERT_TRUE(injector_->Arm(Rule()).ok());
  Rng rng(1);
  EXPECT_TRUE(injector_->ShouldInject(Ctx("api-chap-experiment", "exp"), kPoint, rng));
  EXPECT_FALSE(injector_->ShouldInject(Ctx("api-chap-control", std::nullopt), kPoint, rng));
  EXPECT_FALSE(injector_->ShouldInject(Ctx("api", std::nullopt), kPoint, rng));
  // A stray tag on the wrong group does not widen the scope.
  EXPECT_FALSE(injector_->ShouldInject(Ctx("api-chap-control", "exp"), kPoint, rng));
  EXPECT_FALSE(injector_->ShouldInject(Ctx("api-chap-experiment", "other"), kPoint, rng));
  EXPECT_FALSE(injector_->ShouldInject(Ctx("api-chap-experiment", "exp"),
                                       {"Zuul", "ApiRequest", "API"}, rng));
  injector_->Disarm("exp");
  EXPECT_FALSE(injector_->ShouldInject(Ctx("api-chap-experiment", "exp"), kPoint, rng));
  injector_->Disarm("never-armed");
}

TEST_F(FaultInjectorTest, NonMatchingChecksConsumeNoRandomness) {
  ASSERT_TRUE(injector_->Arm(Rule(0.5)).ok());
  Rng a(9), b(9);
  for (int i = 0; i < 100; ++i) {
    (void)injector_->ShouldInject(Ctx("api-chap-control", std::nullopt), kPoint, a);
    (void)injector_->ShouldInject(Ctx("api", std::nullopt), kPoint, a);
  }
  EXPECT_EQ(a.NextU64(), b.NextU64());
}

// The injected share of matching calls is binomial(n, fraction).
TEST_F(FaultInjectorTest, FractionIsBinomial) {
  const double p = 0.3;
  ASSERT_TRUE(injector_->Arm(Rule(p)).ok());
  Rng rng(123);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    hits += injector_->ShouldInject(Ctx("api-chap-experiment", "exp"), kPoint, rng) ? 1 : 0;
  }
  EXPECT_LE(std::abs(hits - n * p), 4 * std::sqrt(n * p * (1 - p)));
}

TEST(ApplyTreatmentTest, Table) {
  struct Row {
    TreatmentKind kind;
    std::optional<Millis> latency;
    Millis delay;
    bool fails;
  };
  const Row rows[] = {
      {TreatmentKind::kError, std::nullopt, 0, true},
      {TreatmentKind::kLatency, 500, 500, false},
      {TreatmentKind::kErrorAndLatency, 250, 250, true},
  };
  for (const auto& r : rows) {
    FailureTreatment t;
    t.kind = r.kind;
    t.added_latency_ms = r.latency;
    CallEffect e = ApplyTreatment(t);
    EXPECT_EQ(e.delay_ms, r.delay) << TreatmentKindName(r.kind);
    EXPECT_EQ(e.fails, r.fails) << TreatmentKindName(r.kind);
  }
}

TEST(TreatmentTest, Validation) {
  FailureTreatment t;
  EXPECT_TRUE(ValidateTreatment(t).ok());
  t.kind = TreatmentKind::kLatency;
  EXPECT_EQ(ErrorCode(ValidateTreatment(t)), "treatment_invalid");
  t.added_latency_ms = 100;
  EXPECT_TRUE(ValidateTreatment(t).ok());
  t.kind = TreatmentKind::kError;
  EXPECT_EQ(ErrorCode(ValidateTreatment(t)), "treatment_invalid");
  t.added_latency_ms.reset();
  t.failure_fraction = 1.2;
  EXPECT_EQ(ErrorCode(ValidateTreatment(t)), "treatment_invalid");
}

TEST(TreatmentTest, JsonRoundTrip) {
  auto t = TreatmentFromJson(nlohmann::json{{"kind", "latency"}, {"added_latency_ms", 500},
                                            {"failure_fraction", 0.01}});
  ASSERT_TRUE(t.ok()) << t.status();
  EXPECT_EQ(t->kind, TreatmentKind::kLatency);
  auto back = TreatmentFromJson(TreatmentToJson(*t));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(TreatmentToJson(*back), TreatmentToJson(*t));
  EXPECT_EQ(ErrorCode(TreatmentFromJson(nlohmann::json{{"kind", "meteor"}}).status()),
            "treatment_invalid");
}

TEST(InjectionPointTest, NameAndResolve) {
  EXPECT_EQ(PointName(kPoint), "API/GetGallery->Gallery");
  auto t = mesh::LoadTopologyFile(std::string(CHAOSLAB_SCENARIO_DIR) + "/gallery.yaml");
  ASSERT_TRUE(t.ok());
  EXPECT_TRUE(ResolvePoint(*t, kPoint).ok());
  EXPECT_EQ(ErrorCode(ResolvePoint(*t, {"API", "Nope", "Gallery"})), "unknown_point");
}

}  // namespace
}  // namespace chaoslab::injection
