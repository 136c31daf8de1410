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


#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "chaoslab/common/document.h"
#include "chaoslab/common/event_loop.h"
#include "chaoslab/common/random.h"
#include "chaoslab/common/status_macros.h"
#include "chaoslab/common/strings.h"

namespace chaoslab {
namespace {

using nlohmann::json;

TEST(EventLoopTest, OrdersByTimeThenPriorityThenInsertion) {
  EventLoop loop;
  std::vector<std::string> order;
  loop.Schedule(5, [&] { order.push_back("t5-deadline"); }, EventPriority::kDeadline);
  loop.Schedule(5, [&] { order.push_back("t5-a"); });
  loop.Schedule(1, [&] { order.push_back("t1"); });
  loop.Schedule(5, [&] { order.push_back("t5-b"); });
  loop.Run();
  EXPECT_EQ(order, (std::vector<std::string>{"t1", "t5-a", "t5-b", "t5-deadline"}));
  EXPECT_EQ(loop.Now(), 5);
  EXPECT_EQ(loop.processed(), 4u);
}

TEST(EventLoopTest, EventsScheduledDuringRunKeepOrder) {
  EventLoop loop;
  std::vector<int> order;
  loop.Schedule(10, [&] {
    order.push_back(1);
    loop.Schedule(10, [&] { order.push_back(3); });
  });
  loop.Schedule(10, [&] { order.push_back(2); });
  loop.Run();
  EXPECT_EQ(order, (std::vector<int>{1, 2, 3}));
}

TEST(EventLoopTest, RunUntilStopsAndAdvancesClock) {
  EventLoop loop;
  int ran = 0;
  loop.Schedule(3, [&] { ++ran; });
  loop.Schedule(7, [&] { ++ran; });
  loop.RunUntil(5);
  EXPECT_EQ(ran, 1);
  EXPECT_EQ(loop.Now(), 5);
  EXPECT_EQ(loop.pending(), 1u);
  loop.RunUntil(7);
  EXPECT_EQ(ran, 2);
}

TEST(EventLoopTest, SchedulingInThePastThrows) {
  EventLoop loop;
  loop.RunUntil(100);
  EXPECT_THROW(loop.Schedule(99, [] {}), std::logic_error);
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(7), b(7), c(8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const uint64_t x = a.NextU64();
    EXPECT_EQ(x, b.NextU64());
    differs = differs || x != c.NextU64();
  }
  EXPECT_TRUE(differs);
}

TEST(RngTest, NextDoubleUsesTopBits) {
  Rng a(99), b(99);
  for (int i = 0; i < 50; ++i) {
    const double expected = static_cast<double>(b.NextU64() >> 11) / 9007199254740992.0;
    EXPECT_EQ(a.NextDouble(), expected);
  }
}

TEST(RngTest, CertainBernoulliConsumesNothing) {
  Rng a(3), b(3);
  EXPECT_FALSE(a.Bernoulli(0.0));
  EXPECT_TRUE(a.Bernoulli(1.0));
  EXPECT_FALSE(a.Bernoulli(-0.5));
  EXPECT_EQ(a.NextU64(), b.NextU64());
}

TEST(RngTest, NextBelowStaysInRange) {
  Rng r(5);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const uint64_t x = r.NextBelow(7);
    ASSERT_LT(x, 7u);
    ++seen[x];
  }
  for (int n : seen) EXPECT_GT(n, 800);
}

TEST(DocumentTest, ParsesJsonAndYamlAlike) {
  auto from_json = ParseDocument(R"({"schema_version": 1, "a": [1, 2.5, "x", true]})");
  auto from_yaml = ParseDocument("schema_version: 1\na: [1, 2.5, x, true]\n");
  ASSERT_TRUE(from_json.ok());
  ASSERT_TRUE(from_yaml.ok());
  EXPECT_EQ(*from_json, *from_yaml);
}

TEST(DocumentTest, MalformedInputIsParseError) {
  EXPECT_EQ(ErrorCode(ParseDocument("{\"a\": ").status()), "parse_error");
  EXPECT_EQ(ErrorCode(ParseDocument("a: [1, 2").status()), "parse_error");
}

TEST(DocumentTest, SchemaVersionChecked) {
  EXPECT_TRUE(CheckSchemaVersion(json{{"schema_version", 1}}).ok());
  EXPECT_FALSE(CheckSchemaVersion(json{{"schema_version", 2}}).ok());
  EXPECT_FALSE(CheckSchemaVersion(json::array()).ok());
}

TEST(DocumentTest, FieldHelpersReportCodes) {
  const json doc{{"name", "x"}, {"n", 2.5}, {"i", 3}, {"bad", "text"}};
  EXPECT_EQ(*RequireString(doc, "name", "t"), "x");
  EXPECT_EQ(ErrorCode(RequireString(doc, "missing", "t").status()), "missing_field");
  EXPECT_EQ(ErrorCode(RequireNumber(doc, "bad", "t").status()), "invalid_field");
  EXPECT_EQ(*RequireInteger(doc, "i", "t"), 3);
  EXPECT_EQ(ErrorCode(RequireInteger(doc, "n", "t").status()), "invalid_field");
  EXPECT_EQ(*OptionalNumber(doc, "missing", 4.0, "t"), 4.0);
  EXPECT_EQ(*OptionalString(doc, "missing", "d", "t"), "d");
  EXPECT_EQ(ErrorCode(OptionalInteger(json::array(), "i", 0, "t").status()), "invalid_field");
}

TEST(DocumentTest, CodedErrorRoundTrips) {
  absl::Status st = CodedError("some_code", "details here");
  EXPECT_EQ(ErrorCode(st), "some_code");
  EXPECT_EQ(StatusMessage(st), "some_code: details here");
  EXPECT_EQ(ErrorCode(absl::InternalError("Not a code: x")), "");
}

absl::StatusOr<int> Twice(absl::StatusOr<int> v) {
  CHAOSLAB_ASSIGN_OR_RETURN(int x, std::move(v));
  CHAOSLAB_RETURN_IF_ERROR(x < 0 ? CodedError("negative", "x") : absl::OkStatus());
  return 2 * x;
}

TEST(StatusMacrosTest, PropagateErrors) {
  EXPECT_EQ(*Twice(4), 8);
  EXPECT_EQ(ErrorCode(Twice(-1).status()), "negative");
  EXPECT_EQ(Twice(absl::NotFoundError("gone")).status().code(), absl::StatusCode::kNotFound);
}

TEST(StrCatTest, MixesTypes) {
  std::string_view sv = "view";
  EXPECT_EQ(StrCat("a", 1, '-', sv, std::string("s"), 2.5), "a1-views2.5");
}

}  // namespace
}  // namespace chaoslab
