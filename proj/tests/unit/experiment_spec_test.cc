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


#include <algorithm>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "chaoslab/common/document.h"
#include "chaoslab/orchestration/experiment_spec.h"

namespace chaoslab::orchestration {
namespace {

std::string Dir() { return CHAOSLAB_SCENARIO_DIR; }

class ExperimentSpecTest : public ::testing::Test {
 protected:
  void SetUp() override {
    auto t = mesh::LoadTopologyFile(Dir() + "/gallery.yaml");
    ASSERT_TRUE(t.ok()) << t.status();
    topology_ = *t;
    auto s = LoadSpecFile(Dir() + "/experiments/alice.yaml");
    ASSERT_TRUE(s.ok()) << s.status();
    alice_ = *s;
  }

  std::vector<std::string> Codes(const ExperimentSpec& spec,
                                 const std::set<std::string>& busy = {}) const {
    std::vector<std::string> out;
    for (const auto& i : ValidateSpec(spec, topology_, kDefaultMaxDivert, busy)) {
      out.push_back(i.code);
    }
    return out;
  }

  static bool Has(const std::vector<std::string>& codes, const std::string& code) {
    return std::find(codes.begin(), codes.end(), code) != codes.end();
  }

  mesh::Topology topology_;
  ExperimentSpec alice_;
};

TEST_F(ExperimentSpecTest, AliceParsesAndValidates) {
  EXPECT_EQ(alice_.id, "alice-gallery-error");
  EXPECT_EQ(alice_.target_cluster, "API");
  EXPECT_DOUBLE_EQ(alice_.diverted_fraction, 0.003);
  EXPECT_DOUBLE_EQ(alice_.duration_ms(), 30 * 60 * 1000.0);
  EXPECT_EQ(alice_.treatment.kind, injection::TreatmentKind::kError);
  EXPECT_DOUBLE_EQ(alice_.treatment.failure_fraction, 1.0);
  EXPECT_TRUE(Codes(alice_).empty());
  // Defaults.
  EXPECT_DOUBLE_EQ(alice_.safety.sps_drop_threshold, 0.05);
  EXPECT_DOUBLE_EQ(alice_.safety.fallback_failure_threshold, 0.02);
  EXPECT_EQ(alice_.safety.min_samples, 500u);
}

TEST_F(ExperimentSpecTest, ShippedSpecsValidateAgainstTheirScenarios) {
  for (const char* name : {"alice", "alice-short", "alice-latency100", "alice-latency500"}) {
    auto s = LoadSpecFile(Dir() + "/experiments/" + name + ".yaml");
    ASSERT_TRUE(s.ok()) << name << ": " << s.status();
    EXPECT_TRUE(Codes(*s).empty()) << name;
  }
  auto cascade = mesh::LoadTopologyFile(Dir() + "/cascade.yaml");
  auto spec = LoadSpecFile(Dir() + "/experiments/cascade-c-error.yaml");
  ASSERT_TRUE(cascade.ok() && spec.ok());
  EXPECT_TRUE(ValidateSpec(*spec, *cascade).empty());
}

TEST_F(ExperimentSpecTest, FractionBounds) {
  ExperimentSpec s = alice_;
  s.diverted_fraction = 0.5;
  EXPECT_EQ(Codes(s), std::vector<std::string>{"fraction_out_of_range"});
  s.diverted_fraction = 0;
  EXPECT_EQ(Codes(s), std::vector<std::string>{"fraction_out_of_range"});
  s.diverted_fraction = kDefaultMaxDivert;
  EXPECT_TRUE(Codes(s).empty());
}

TEST_F(ExperimentSpecTest, EveryIssueIsReported) {
  ExperimentSpec s = alice_;
  s.id = "bad id!";
  s.duration_minutes = 0;
  s.tracked_commands = {"Nope"};
  s.injection_points = {{"API", "Nope", "Gallery"}};
  s.treatment.failure_fraction = 2;
  s.safety.sps_drop_threshold = 1.5;
  const auto codes = Codes(s);
  for (const char* c : {"invalid_id", "duration_invalid", "unknown_command", "unknown_point",
                        "treatment_invalid", "safety_invalid"}) {
    EXPECT_TRUE(Has(codes, c)) << c;
  }
}

TEST_F(ExperimentSpecTest, ClusterChecks) {
  ExperimentSpec s = alice_;
  s.target_cluster = "Nowhere";
  EXPECT_TRUE(Has(Codes(s), "unknown_cluster"));
  s.target_cluster = "Gallery";
  EXPECT_TRUE(Has(Codes(s), "cluster_not_routable"));
  s = alice_;
  s.injection_points = {{"Zuul", "ApiRequest", "API"}};
  EXPECT_EQ(Codes(s), std::vector<std::string>{"point_outside_cluster"});
  s = alice_;
  s.injection_points.clear();
  EXPECT_EQ(Codes(s), std::vector<std::string>{"injection_points_empty"});
  s = alice_;
  s.tracked_commands.clear();
  EXPECT_EQ(Codes(s), std::vector<std::string>{"tracked_commands_empty"});
}

TEST_F(ExperimentSpecTest, BusyClusterConflicts) {
  EXPECT_EQ(Codes(alice_, {"API"}), std::vector<std::string>{"cluster_busy"});
  EXPECT_TRUE(Codes(alice_, {"Gallery"}).empty());
}

TEST_F(ExperimentSpecTest, JsonRoundTrip) {
  auto back = SpecFromJson(SpecToJson(alice_));
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(SpecToJson(*back), SpecToJson(alice_));
}

TEST_F(ExperimentSpecTest, ShapeErrors) {
  nlohmann::json doc = SpecToJson(alice_);
  doc.erase("treatment");
  EXPECT_EQ(ErrorCode(SpecFromJson(doc).status()), "missing_field");
  doc = SpecToJson(alice_);
  doc["tracked_commands"] = "GetGallery";
  EXPECT_EQ(ErrorCode(SpecFromJson(doc).status()), "invalid_field");
  doc = SpecToJson(alice_);
  doc["schema_version"] = 2;
  EXPECT_EQ(ErrorCode(SpecFromJson(doc).status()), "unsupported_schema_version");
  doc = SpecToJson(alice_);
  doc["safety"] = {{"min_samples", -1}};
  EXPECT_EQ(ErrorCode(SpecFromJson(doc).status()), "safety_invalid");
}

TEST_F(ExperimentSpecTest, SafetyOverrides) {
  nlohmann::json doc = SpecToJson(alice_);
  doc["safety"] = {{"sps_drop_threshold", 0.1}, {"evaluation_interval_s", 30}, {"min_samples", 50}};
  auto s = SpecFromJson(doc);
  ASSERT_TRUE(s.ok());
  EXPECT_DOUBLE_EQ(s->safety.sps_drop_threshold, 0.1);
  EXPECT_DOUBLE_EQ(s->safety.evaluation_interval_ms, 30000);
  EXPECT_EQ(s->safety.min_samples, 50u);
  EXPECT_DOUBLE_EQ(s->safety.fallback_failure_threshold, 0.02);
}

}  // namespace
}  // namespace chaoslab::orchestration
