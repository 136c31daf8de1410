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

#include "chaoslab/routing/router.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "chaoslab/common/document.h"
#include "chaoslab/common/strings.h"

namespace chaoslab::routing {

std::string_view GroupKindName(GroupKind kind) {
  switch (kind) {
    case GroupKind::kBaseline:
      return "baseline";
    case GroupKind::kControl:
      return "control";
    case GroupKind::kExperiment:
      return "experiment";
  }
  return "baseline";
}

std::string BaselineGroupName(std::string_view cluster) {
  std::string out(cluster);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string ControlGroupName(std::string_view cluster) {
  return StrCat(BaselineGroupName(cluster), "-chap-control");
}

std::string ExperimentGroupName(std::string_view cluster) {
  return StrCat(BaselineGroupName(cluster), "-chap-experiment");
}

// ---------------------------------------------------------------------------
// ServerGroupRegistry

absl::Status ServerGroupRegistry::Add(ServerGroup group) {
  std::lock_guard<std::mutex> lock(mu_);
  if (failing_adds_ > 0) {
    --failing_adds_;
    return absl::UnavailableError(StrCat("provisioning_failed: ", group.name));
  }
  if (groups_.count(group.name)) {
    return absl::AlreadyExistsError(StrCat("group_exists: ", group.name));
  }
  if (group.kind == GroupKind::kBaseline) {
    for (const auto& [_, g] : groups_) {
      if (g.cluster == group.cluster && g.kind == GroupKind::kBaseline) {
        return absl::AlreadyExistsError(
            StrCat("baseline_exists: cluster ", group.cluster, " already has ", g.name));
      }
    }
  }
  const std::string name = group.name;
  groups_.emplace(name, std::move(group));
  return absl::OkStatus();
}

absl::Status ServerGroupRegistry::Remove(const std::string& name) {
  std::lock_guard<std::mutex> lock(mu_);
  if (failing_removals_ > 0) {
    --failing_removals_;
    return absl::UnavailableError(StrCat("decommission_failed: ", name));
  }
  groups_.erase(name);
  return absl::OkStatus();
}

std::optional<ServerGroup> ServerGroupRegistry::Find(const std::string& name) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = groups_.find(name);
  if (it == groups_.end()) return std::nullopt;
  return it->second;
}

std::optional<GroupKind> ServerGroupRegistry::KindOf(const std::string& name) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = groups_.find(name);
  if (it == groups_.end()) return std::nullopt;
  return it->second.kind;
}

std::vector<ServerGroup> ServerGroupRegistry::List() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<ServerGroup> out;
  for (const auto& [_, g] : groups_) out.push_back(g);
  return out;
}

std::vector<ServerGroup> ServerGroupRegistry::ListCluster(const std::string& cluster) const {
  std::vector<ServerGroup> out;
  for (auto& g : List()) {
    if (g.cluster == cluster) out.push_back(std::move(g));
  }
  return out;
}

void ServerGroupRegistry::FailNextAdds(int n) {
  std::lock_guard<std::mutex> lock(mu_);
  failing_adds_ = n;
}

void ServerGroupRegistry::FailNextRemovals(int n) {
  std::lock_guard<std::mutex> lock(mu_);
  failing_removals_ = n;
}

// ---------------------------------------------------------------------------
// Hashing and assignment

uint64_t RoutingHash(uint64_t user_id, std::string_view salt) {
  constexpr uint64_t kOffset = 0xcbf29ce484222325ULL;
  constexpr uint64_t kPrime = 0x100000001b3ULL;
  uint64_t h = kOffset;
  for (unsigned char c : salt) {
    h ^= c;
    h *= kPrime;
  }
  for (int i = 0; i < 8; ++i) {
    h ^= (user_id >> (8 * i)) & 0xffU;
    h *= kPrime;
  }
  // SplitMix64 finalizer.
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

double HashToUnit(uint64_t hash) { return static_cast<double>(hash >> 11) * 0x1.0p-53; }

std::optional<double> RoutingTable::WeightOf(std::string_view group) const {
  for (const auto& [g, w] : weights) {
    if (g == group) return w;
  }
  return std::nullopt;
}

absl::Status ValidateRoutingTable(const RoutingTable& table, const ServerGroupRegistry* groups) {
  if (table.weights.empty()) return CodedError("invalid_weights", "routing table has no groups");
  std::set<std::string> seen;
  double sum = 0;
  for (const auto& [group, weight] : table.weights) {
    if (!seen.insert(group).second) {
      return CodedError("invalid_weights", StrCat("duplicate group ", group));
    }
    if (!std::isfinite(weight) || weight < 0) {
      return CodedError("invalid_weights", StrCat("negative weight for ", group));
    }
    if (groups != nullptr && !groups->Find(group)) {
      return CodedError("unknown_group", group);
    }
    sum += weight;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    return CodedError("invalid_weights", StrCat("weights sum to ", sum, ", expected 1"));
  }
  return absl::OkStatus();
}

std::string AssignGroup(const RoutingTable& table, uint64_t user_id) {
  const double u = HashToUnit(RoutingHash(user_id, table.salt));
  double cumulative = 0;
  const std::string* last_positive = nullptr;
  for (const auto& [group, weight] : table.weights) {
    if (weight <= 0) continue;
    last_positive = &group;
    cumulative += weight;
    if (u < cumulative) return group;
  }
  // Rounding can leave the cumulative sum a hair under 1.
  return last_positive != nullptr ? *last_positive : table.weights.front().first;
}

absl::StatusOr<RoutingTable> UpdateWeights(const RoutingTable& table,
                                           std::vector<std::pair<std::string, double>> weights,
                                           std::optional<std::string> salt,
                                           const ServerGroupRegistry* groups) {
  RoutingTable next = table;
  next.weights = std::move(weights);
  if (salt) next.salt = *salt;
  if (auto st = ValidateRoutingTable(next, groups); !st.ok()) return st;
  return next;
}

// ---------------------------------------------------------------------------
// TrafficRouter

absl::Status TrafficRouter::Install(RoutingTable table) {
  if (auto st = ValidateRoutingTable(table, groups_); !st.ok()) return st;
  auto shared = std::make_shared<const RoutingTable>(std::move(table));
  std::lock_guard<std::mutex> lock(mu_);
  tables_[shared->cluster] = std::move(shared);
  return absl::OkStatus();
}

absl::Status TrafficRouter::Update(const std::string& cluster,
                                   std::vector<std::pair<std::string, double>> weights,
                                   std::optional<std::string> salt) {
  std::shared_ptr<const RoutingTable> current = Table(cluster);
  if (!current) return absl::NotFoundError(StrCat("unknown_cluster: ", cluster));
  auto next = UpdateWeights(*current, std::move(weights), std::move(salt), groups_);
  if (!next.ok()) return next.status();
  auto shared = std::make_shared<const RoutingTable>(*std::move(next));
  std::lock_guard<std::mutex> lock(mu_);
  tables_[cluster] = std::move(shared);
  return absl::OkStatus();
}

std::shared_ptr<const RoutingTable> TrafficRouter::Table(const std::string& cluster) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = tables_.find(cluster);
  return it == tables_.end() ? nullptr : it->second;
}

std::vector<std::shared_ptr<const RoutingTable>> TrafficRouter::Tables() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::shared_ptr<const RoutingTable>> out;
  for (const auto& [_, t] : tables_) out.push_back(t);
  return out;
}

std::string TrafficRouter::Route(const std::string& cluster, uint64_t user_id) {
  std::shared_ptr<const RoutingTable> table = Table(cluster);
  std::string group = table ? AssignGroup(*table, user_id) : BaselineGroupName(cluster);
  std::lock_guard<std::mutex> lock(mu_);
  ++counts_[group];
  return group;
}

std::map<std::string, uint64_t> TrafficRouter::AssignmentCounts() const {
  std::lock_guard<std::mutex> lock(mu_);
  return counts_;
}

}  // namespace chaoslab::routing
