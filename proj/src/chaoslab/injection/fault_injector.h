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

// Request-scoped failure injection at named call edges.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chaoslab/common/random.h"
#include "chaoslab/common/request_context.h"
#include "chaoslab/mesh/topology.h"
#include "chaoslab/routing/router.h"
#include "json.hpp"

namespace chaoslab::injection {

enum class TreatmentKind : uint8_t { kError, kLatency, kErrorAndLatency };

std::string_view TreatmentKindName(TreatmentKind kind);
std::optional<TreatmentKind> ParseTreatmentKind(std::string_view name);

struct FailureTreatment {
  TreatmentKind kind = TreatmentKind::kError;
  // Required (> 0) iff kind involves latency.
  std::optional<Millis> added_latency_ms;
  double failure_fraction = 1.0;
};

absl::Status ValidateTreatment(const FailureTreatment& treatment);
// With validate=false only the shape is checked; ranges are left to
// ValidateTreatment so callers can collect every problem at once.
absl::StatusOr<FailureTreatment> TreatmentFromJson(const nlohmann::json& doc,
                                                   bool validate = true);
nlohmann::json TreatmentToJson(const FailureTreatment& treatment);

struct InjectionPoint {
  std::string caller;
  std::string command_name;
  std::string target;

  auto operator<=>(const InjectionPoint&) const = default;
};

std::string PointName(const InjectionPoint& point);  // "API/GetGallery->Gallery"
absl::StatusOr<InjectionPoint> PointFromJson(const nlohmann::json& doc);
nlohmann::json PointToJson(const InjectionPoint& point);

// Ok iff the point names an existing call edge.
absl::Status ResolvePoint(const mesh::Topology& topology, const InjectionPoint& point);

struct InjectionRule {
  std::string experiment_id;
  std::vector<InjectionPoint> points;
  FailureTreatment treatment;
  std::string scope_group;
  bool armed = true;
};

nlohmann::json RuleToJson(const InjectionRule& rule);

// error: fail at +0. latency: dispatch the real call D later. Both: fail at +D.
CallEffect ApplyTreatment(const FailureTreatment& treatment);

// Rule table. Reads (ShouldInject) share a lock; Arm and Disarm are
// serialized.
class FaultInjector {
 public:
  FaultInjector(const mesh::Topology& topology, const routing::ServerGroupRegistry& groups)
      : topology_(topology), groups_(groups) {}

  // Returns the rule id (the experiment id). Re-arming the same experiment
  // replaces its rule.
  absl::StatusOr<std::string> Arm(InjectionRule rule);
  // Unknown ids are a no-op.
  void Disarm(const std::string& experiment_id);

  // The treatment iff an armed rule matches the context's experiment tag and
  // server group, lists the point, and the fraction draw succeeds. The draw
  // happens only on a match and only when the fraction is below 1.
  std::optional<FailureTreatment> ShouldInject(const RequestContext& ctx,
                                               const InjectionPoint& point, Rng& rng) const;

  std::optional<InjectionRule> Rule(const std::string& experiment_id) const;
  std::vector<InjectionRule> Rules() const;

 private:
  const mesh::Topology& topology_;
  const routing::ServerGroupRegistry& groups_;
  mutable std::shared_mutex mu_;
  std::map<std::string, InjectionRule> rules_;
};

}  // namespace chaoslab::injection
