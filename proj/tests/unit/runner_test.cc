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


#include <memory>
#include <string>

#include <gtest/gtest.h>

#include "chaoslab/common/document.h"
#include "chaoslab/orchestration/runner.h"

namespace chaoslab::orchestration {
namespace {

std::string Dir() { return CHAOSLAB_SCENARIO_DIR; }

std::unique_ptr<Platform> Make(const std::string& scenario, uint64_t seed = 42) {
  auto t = mesh::LoadTopologyFile(Dir() + "/" + scenario + ".yaml");
  EXPECT_TRUE(t.ok()) << t.status();
  auto p = Platform::Create(*t, {.seed = seed});
  EXPECT_TRUE(p.ok()) << p.status();
  return *std::move(p);
}

ExperimentSpec Spec(const std::string& file) {
  auto s = LoadSpecFile(Dir() + "/experiments/" + file + ".yaml");
  EXPECT_TRUE(s.ok()) << s.status();
  return *s;
}

RunResult RunOn(const std::string& scenario, const std::string& spec, uint64_t seed = 42) {
  auto p = Make(scenario, seed);
  auto r = RunExperimentOn(*p, Spec(spec));
  EXPECT_TRUE(r.ok()) << r.status();
  return *r;
}

TEST(RunnerTest, ExitCodeMapping) {
  EXPECT_EQ(ExitCodeFor(analysis::VerdictResult::kResilient), kExitResilient);
  EXPECT_EQ(ExitCodeFor(analysis::VerdictResult::kNotResilient), kExitNotResilient);
  EXPECT_EQ(ExitCodeFor(analysis::VerdictResult::kInconclusive), kExitInconclusive);
}

TEST(RunnerTest, SameSeedSameReport) {
  const RunResult a = RunOn("gallery", "alice-short", 9);
  const RunResult b = RunOn("gallery", "alice-short", 9);
  EXPECT_EQ(DumpDocument(a.report), DumpDocument(b.report));
  const RunResult c = RunOn("gallery", "alice-short", 10);
  EXPECT_NE(DumpDocument(a.report), DumpDocument(c.report));
}

TEST(RunnerTest, ShortRunIsInconclusive) {
  const RunResult r = RunOn("gallery", "alice-short");
  EXPECT_EQ(r.exit_code, kExitInconclusive);
  EXPECT_EQ(r.report["verdict"]["result"], "inconclusive");
  EXPECT_EQ(r.report["phase"], "Completed");
}

TEST(RunnerTest, BrokenFallbackIsNotResilient) {
  const RunResult r = RunOn("gallery-broken", "alice");
  EXPECT_EQ(r.exit_code, kExitNotResilient);
  EXPECT_EQ(r.report["phase"], "Aborted");
  EXPECT_EQ(r.report["post_teardown"]["injected_error"], 0);
  EXPECT_EQ(r.report["post_teardown"]["requests_routed_to_clones"], 0);
}

TEST(RunnerTest, InvalidSpecGivesValidationReport) {
  auto p = Make("gallery");
  ExperimentSpec s = Spec("alice");
  s.diverted_fraction = 0.5;
  auto r = RunExperimentOn(*p, s);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->exit_code, kExitValidationFailure);
  EXPECT_EQ(r->report["kind"], "validation_report");
  ASSERT_EQ(r->issues.size(), 1u);
  EXPECT_EQ(r->issues[0].code, "fraction_out_of_range");
  EXPECT_FALSE(r->verdict.has_value());
}

TEST(RunnerTest, TopologyWithoutTrafficIsRejected) {
  auto t = mesh::LoadTopologyFile(Dir() + "/gallery.yaml");
  ASSERT_TRUE(t.ok());
  t->traffic.reset();
  auto p = Platform::Create(*t);
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(ErrorCode(RunExperimentOn(**p, Spec("alice")).status()), "missing_traffic");
}

TEST(RunnerTest, SimulationSummary) {
  auto p = Make("gallery");
  auto r = RunSimulation(*p, 20);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->summary.requests, 300u * 20);
  const nlohmann::json j = r->ToJson();
  EXPECT_EQ(j["kind"], "simulation_report");
  EXPECT_EQ(r->snapshot.Total({"api", "requests", telemetry::Outcome::kNone}), 6000u);
}

}  // namespace
}  // namespace chaoslab::orchestration
