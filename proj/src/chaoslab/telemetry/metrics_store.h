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

#pragma once

#include <atomic>
#include <compare>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "chaoslab/common/time.h"
#include "json.hpp"

namespace chaoslab::telemetry {

// Outcome dimension of a metric. The first three are the per-command counts
// a dashboard plots; the rest are annotations and request-level outcomes.
enum class Outcome : uint8_t {
  kNone = 0,  // dimensionless metrics: "sps", "requests", service arrivals
  kSuccess,
  kFallbackSuccess,
  kFallbackFailure,
  kShortCircuit,
  kInjectedError,
  kInjectedLatency,
  kTimeout,
  kOverload,
  kDegraded,
  kFailed,
};

std::string_view OutcomeName(Outcome outcome);
std::optional<Outcome> ParseOutcome(std::string_view name);

// Reserved metric names. Anything else is a command name.
inline constexpr std::string_view kSpsMetric = "sps";            // stream starts
inline constexpr std::string_view kRequestsMetric = "requests";  // routed requests
// Per-service arrivals (kNone) and rejections (kOverload).
std::string ServiceMetric(std::string_view service);

struct MetricId {
  std::string group;
  std::string name;
  Outcome outcome = Outcome::kNone;

  auto operator<=>(const MetricId&) const = default;
};

struct MetricIdHash {
  size_t operator()(const MetricId& id) const;
};

// Bucketed counts. Points are (bucket start, count), strictly increasing in
// time; buckets with a zero count are omitted.
struct TimeSeries {
  bool exists = false;  // false for a metric that was never recorded
  Millis bucket_width_ms = 0;
  std::vector<std::pair<Millis, uint64_t>> points;
  uint64_t total = 0;
};

struct LatencyBucket {
  Millis start = 0;
  uint64_t count = 0;
  double sum_ms = 0;
  double max_ms = 0;
};

struct LatencySummary {
  uint64_t count = 0;
  double sum_ms = 0;
  double max_ms = 0;
  std::vector<LatencyBucket> buckets;
  std::optional<double> mean_ms() const {
    if (count == 0) return std::nullopt;
    return sum_ms / static_cast<double>(count);
  }
};

// Stream starts per second over a window, plus stream starts per routed
// request. The normalized rate is absent (never 0) when no request was
// routed to the group in the window.
struct SpsRate {
  uint64_t stream_starts = 0;
  uint64_t requests = 0;
  double per_second = 0;
  std::optional<double> normalized;
};

// A frozen copy of every series for a set of groups over [from, to).
class Snapshot {
 public:
  Snapshot() = default;
  Snapshot(Millis from, Millis to, Millis bucket_width)
      : from_(from), to_(to), bucket_width_(bucket_width) {}

  Millis from() const { return from_; }
  Millis to() const { return to_; }
  Millis bucket_width() const { return bucket_width_; }

  void Add(const MetricId& id, Millis bucket_start, uint64_t count);
  void AddLatency(const std::string& group, const std::string& command,
                  const LatencyBucket& bucket);

  bool Has(const MetricId& id) const { return series_.count(id) > 0; }
  uint64_t Total(const MetricId& id) const;
  const TimeSeries* Find(const MetricId& id) const;
  LatencySummary Latency(const std::string& group, const std::string& command) const;
  // True if any outcome of this command was recorded for the group.
  bool HasCommand(const std::string& group, const std::string& command) const;

  const std::map<MetricId, TimeSeries>& series() const { return series_; }

  nlohmann::json ToJson() const;
  static absl::StatusOr<Snapshot> FromJson(const nlohmann::json& doc);

 private:
  Millis from_ = 0;
  Millis to_ = 0;
  Millis bucket_width_ = 0;
  std::map<MetricId, TimeSeries> series_;
  std::map<std::pair<std::string, std::string>, LatencySummary> latency_;
};

// In-memory store of windowed counters. All methods are thread-safe; lifetime
// totals never decrease.
//
// Windows are bucket-granular and half-open: a bucket belongs to [from, to)
// iff its start time lies in that range, so adjacent windows tile exactly.
class MetricsStore {
 public:
  explicit MetricsStore(Millis bucket_width_ms = 1000);

  Millis bucket_width() const { return bucket_width_; }

  // `at` must be non-negative.
  void Increment(const MetricId& id, Millis at, uint64_t by = 1);
  void RecordLatency(const std::string& group, const std::string& command, Millis at,
                     Millis latency_ms);

  TimeSeries QueryWindow(const MetricId& id, Millis from, Millis to) const;
  uint64_t Total(const MetricId& id, Millis from, Millis to) const;
  uint64_t LifetimeTotal(const MetricId& id) const;
  LatencySummary QueryLatency(const std::string& group, const std::string& command,
                              Millis from, Millis to) const;

  // Requires to > from.
  SpsRate ComputeSps(const std::string& group, Millis from, Millis to) const;

  // Copies the series of the listed groups (all groups if empty).
  Snapshot TakeSnapshot(Millis from, Millis to,
                        const std::vector<std::string>& groups = {}) const;

  std::vector<MetricId> ListMetrics() const;
  // Largest bucket start that has any data, or nullopt if the store is empty.
  std::optional<Millis> LastBucketStart() const;

  // Monitoring treats an unavailable store as a reason to stop an experiment.
  bool available() const { return available_.load(); }
  void set_available(bool available) { available_.store(available); }

 private:
  struct LatencyCell {
    uint64_t count = 0;
    double sum_ms = 0;
    double max_ms = 0;
  };

  size_t BucketIndex(Millis at) const;
  // First bucket index whose start is >= t.
  size_t FirstBucketAtOrAfter(Millis t) const;
  TimeSeries SliceLocked(const std::vector<uint64_t>& buckets, Millis from, Millis to) const;
  LatencySummary LatencySliceLocked(const std::vector<LatencyCell>& cells, Millis from,
                                    Millis to) const;

  const Millis bucket_width_;
  std::atomic<bool> available_{true};
  mutable std::mutex mu_;
  std::unordered_map<MetricId, std::vector<uint64_t>, MetricIdHash> counters_;
  std::map<std::pair<std::string, std::string>, std::vector<LatencyCell>> latency_;
  size_t max_bucket_ = 0;
  bool any_ = false;
};

}  // namespace chaoslab::telemetry
