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


#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "chaoslab/common/document.h"
#include "chaoslab/mesh/topology.h"

namespace chaoslab::mesh {
namespace {

constexpr char kBase[] = R"(
schema_version: 1
name: t
routed_cluster: B
entry: A
services:
  - name: A
    base_latency_ms: {min: 1, max: 3}
    dependencies:
      - {command_name: CallB, target: B, criticality: critical, fallback: {kind: static_value}, timeout_ms: 500}
  - name: B
    base_latency_ms: {min: 2, max: 2}
    intrinsic_error_rate: 0.01
    capacity: 4
traffic: {rate_per_s: 10, duration_s: 60, users: 100}
)";

std::string Replace(std::string text, const std::string& from, const std::string& to) {
  const size_t pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

std::string CodeOf(const std::string& text) {
  return std::string(ErrorCode(LoadTopology(text).status()));
}

TEST(TopologyTest, ParsesFields) {
  auto t = LoadTopology(kBase);
  ASSERT_TRUE(t.ok()) << t.status();
  EXPECT_EQ(t->entry, "A");
  EXPECT_EQ(t->routed_cluster, "B");
  const ServiceSpec* b = t->Find("B");
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->capacity, 4u);
  EXPECT_TRUE(b->latency.fixed());
  EXPECT_DOUBLE_EQ(b->intrinsic_error_rate, 0.01);
  EXPECT_FALSE(t->Find("A")->capacity.has_value());
  const CallEdge* e = t->Find("A")->FindEdge("CallB");
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->command.timeout_ms, 500);
  EXPECT_EQ(e->command.command_name, "CallB");
  EXPECT_EQ(e->fallback.kind, resilience::FallbackKind::kStaticValue);
  ASSERT_TRUE(t->traffic.has_value());
  EXPECT_EQ(t->traffic->users, 100u);
  EXPECT_EQ(t->IndexOf("B"), 1);
  EXPECT_EQ(t->IndexOf("Z"), -1);
}

TEST(TopologyTest, JsonRoundTrip) {
  auto t = LoadTopology(kBase);
  ASSERT_TRUE(t.ok());
  auto again = TopologyFromJson(TopologyToJson(*t));
  ASSERT_TRUE(again.ok()) << again.status();
  EXPECT_EQ(TopologyToJson(*again), TopologyToJson(*t));
}

TEST(TopologyTest, RejectsBadDocuments) {
  EXPECT_EQ(CodeOf(Replace(kBase, "target: B,", "target: Z,")), "dangling_target");
  EXPECT_EQ(CodeOf(Replace(kBase, "name: B", "name: A")), "duplicate_service");
  EXPECT_EQ(CodeOf(Replace(kBase, "intrinsic_error_rate: 0.01", "intrinsic_error_rate: 1.5")),
            "invalid_probability");
  EXPECT_EQ(CodeOf(Replace(kBase, "capacity: 4", "capacity: 0")), "invalid_capacity");
  EXPECT_EQ(CodeOf(Replace(kBase, "{min: 2, max: 2}", "{min: 5, max: 2}")), "invalid_latency");
  EXPECT_EQ(CodeOf(Replace(kBase, "entry: A", "entry: Q")), "unknown_entry");
  EXPECT_EQ(CodeOf(Replace(kBase, "routed_cluster: B", "routed_cluster: Q")),
            "unknown_routed_cluster");
  EXPECT_EQ(CodeOf(Replace(kBase, "{kind: static_value}", "{kind: retry}")), "invalid_fallback");
  EXPECT_EQ(CodeOf(Replace(kBase, "timeout_ms: 500", "timeout_ms: 0")), "invalid_command_config");
  EXPECT_EQ(CodeOf(Replace(kBase, "users: 100", "users: 0")), "invalid_traffic");
  EXPECT_EQ(CodeOf(Replace(kBase, "schema_version: 1", "schema_version: 7")),
            "unsupported_schema_version");
  EXPECT_EQ(CodeOf("schema_version: 1\nname: x\n"), "missing_field");
}

TEST(TopologyTest, RejectsCycles) {
  const std::string cyclic = Replace(
      kBase, "    capacity: 4\n",
      "    capacity: 4\n    dependencies:\n      - {command_name: CallA, target: A, fallback: {kind: broken}}\n");
  EXPECT_EQ(CodeOf(cyclic), "cyclic_dependency");
  // Alternate fallback targets count as edges too.
  const std::string alt =
      Replace(kBase, "{kind: static_value}", "{kind: alternate_service_call, alternate_target: A}");
  EXPECT_EQ(CodeOf(alt), "cyclic_dependency");
}

TEST(TopologyTest, DuplicateCommandPerCaller) {
  const std::string dup = Replace(
      kBase, "timeout_ms: 500}\n",
      "timeout_ms: 500}\n      - {command_name: CallB, target: B, fallback: {kind: broken}}\n");
  EXPECT_EQ(CodeOf(dup), "duplicate_command");
}

TEST(TopologyTest, ShippedScenariosValidate) {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(CHAOSLAB_SCENARIO_DIR)) {
    if (entry.path().extension() != ".yaml") continue;
    auto t = LoadTopologyFile(entry.path().string());
    EXPECT_TRUE(t.ok()) << entry.path() << ": " << t.status();
    if (t.ok()) {
      EXPECT_TRUE(t->traffic.has_value());
    }
    ++seen;
  }
  EXPECT_GE(seen, 5);
}

TEST(TopologyTest, MissingFileIsNotFound) {
  EXPECT_EQ(ErrorCode(LoadTopologyFile("/nonexistent/x.yaml").status()), "not_found");
}

TEST(LatencySpecTest, FixedConsumesNoRandomness) {
  Rng a(1), b(1);
  LatencySpec fixed{5, 5};
  EXPECT_EQ(fixed.Sample(a), 5);
  EXPECT_EQ(a.NextU64(), b.NextU64());
  LatencySpec range{10, 30};
  for (int i = 0; i < 1000; ++i) {
    const Millis v = range.Sample(a);
    ASSERT_GE(v, 10);
    ASSERT_LT(v, 30);
  }
}

}  // namespace
}  // namespace chaoslab::mesh
