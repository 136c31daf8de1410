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

// Front-door routing: server groups and sticky weighted assignment of users
// to groups.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace chaoslab::routing {

enum class GroupKind : uint8_t { kBaseline, kControl, kExperiment };

std::string_view GroupKindName(GroupKind kind);

struct ServerGroup {
  std::string name;
  std::string cluster;
  GroupKind kind = GroupKind::kBaseline;
  std::string software_version;
  // Set for control and experiment groups.
  std::optional<std::string> experiment_id;
};

// "API" -> "api", "api-chap-control", "api-chap-experiment".
std::string BaselineGroupName(std::string_view cluster);
std::string ControlGroupName(std::string_view cluster);
std::string ExperimentGroupName(std::string_view cluster);

// Thread-safe set of live server groups. Exactly one baseline per cluster.
class ServerGroupRegistry {
 public:
  absl::Status Add(ServerGroup group);
  absl::Status Remove(const std::string& name);
  std::optional<ServerGroup> Find(const std::string& name) const;
  std::optional<GroupKind> KindOf(const std::string& name) const;
  std::vector<ServerGroup> List() const;
  std::vector<ServerGroup> ListCluster(const std::string& cluster) const;

  // Fault points: the next `n` calls to Add (or Remove) fail with
  // Unavailable.
  void FailNextAdds(int n);
  void FailNextRemovals(int n);

 private:
  mutable std::mutex mu_;
  std::map<std::string, ServerGroup> groups_;
  int failing_adds_ = 0;
  int failing_removals_ = 0;
};

// Name of the hash used for assignment; recorded in topology documents.
inline constexpr std::string_view kRoutingHashName = "fnv1a64-splitmix64";

// FNV-1a 64 over the salt bytes followed by the 8 little-endian bytes of
// user_id, finished with the SplitMix64 mixer. Stable across platforms.
uint64_t RoutingHash(uint64_t user_id, std::string_view salt);

// Maps a hash to [0, 1) using its top 53 bits.
double HashToUnit(uint64_t hash);

struct RoutingTable {
  std::string cluster;
  // Cumulative selection walks the groups in this order.
  std::vector<std::pair<std::string, double>> weights;
  std::string salt;

  std::optional<double> WeightOf(std::string_view group) const;
};

inline constexpr double kWeightSumTolerance = 1e-9;

// Weights non-negative, summing to 1 within kWeightSumTolerance, no duplicate
// groups; when `groups` is given every group must exist in it.
absl::Status ValidateRoutingTable(const RoutingTable& table,
                                  const ServerGroupRegistry* groups = nullptr);

// Pure, sticky assignment: the unit-interval image of RoutingHash(user, salt)
// selects a group by cumulative weight.
std::string AssignGroup(const RoutingTable& table, uint64_t user_id);

// Returns a copy of `table` with new weights (and salt, if given).
absl::StatusOr<RoutingTable> UpdateWeights(const RoutingTable& table,
                                           std::vector<std::pair<std::string, double>> weights,
                                           std::optional<std::string> salt = std::nullopt,
                                           const ServerGroupRegistry* groups = nullptr);

// Holds the live routing table per cluster. Tables are replaced whole under a
// lock, so a reader sees either the old or the new table, never a mix.
// Assignment counts per group are kept for cross-checking telemetry.
class TrafficRouter {
 public:
  explicit TrafficRouter(const ServerGroupRegistry* groups = nullptr) : groups_(groups) {}

  absl::Status Install(RoutingTable table);
  // Invalid weights leave the live table unchanged.
  absl::Status Update(const std::string& cluster,
                      std::vector<std::pair<std::string, double>> weights,
                      std::optional<std::string> salt = std::nullopt);

  std::shared_ptr<const RoutingTable> Table(const std::string& cluster) const;
  std::vector<std::shared_ptr<const RoutingTable>> Tables() const;

  // Assigns and counts. Clusters without a table route to their baseline.
  std::string Route(const std::string& cluster, uint64_t user_id);

  std::map<std::string, uint64_t> AssignmentCounts() const;

 private:
  const ServerGroupRegistry* groups_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const RoutingTable>> tables_;
  std::map<std::string, uint64_t> counts_;
};

}  // namespace chaoslab::routing
