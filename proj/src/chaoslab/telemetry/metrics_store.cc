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

#include "chaoslab/telemetry/metrics_store.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "chaoslab/common/document.h"
#include "chaoslab/common/strings.h"

namespace chaoslab::telemetry {
namespace {

constexpr std::array<std::pair<Outcome, std::string_view>, 11> kOutcomeNames = {{
    {Outcome::kNone, "none"},
    {Outcome::kSuccess, "success"},
    {Outcome::kFallbackSuccess, "fallback_success"},
    {Outcome::kFallbackFailure, "fallback_failure"},
    {Outcome::kShortCircuit, "short_circuit"},
    {Outcome::kInjectedError, "injected_error"},
    {Outcome::kInjectedLatency, "injected_latency"},
    {Outcome::kTimeout, "timeout"},
    {Outcome::kOverload, "overload"},
    {Outcome::kDegraded, "degraded"},
    {Outcome::kFailed, "failed"},
}};

}  // namespace

std::string_view OutcomeName(Outcome outcome) {
  for (const auto& [o, name] : kOutcomeNames) {
    if (o == outcome) return name;
  }
  return "unknown";
}

std::optional<Outcome> ParseOutcome(std::string_view name) {
  for (const auto& [o, n] : kOutcomeNames) {
    if (n == name) return o;
  }
  return std::nullopt;
}

std::string ServiceMetric(std::string_view service) { return StrCat("svc:", service); }

size_t MetricIdHash::operator()(const MetricId& id) const {
  size_t h = std::hash<std::string>()(id.group);
  h ^= std::hash<std::string>()(id.name) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= static_cast<size_t>(id.outcome) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

// ---------------------------------------------------------------------------
// Snapshot

void Snapshot::Add(const MetricId& id, Millis bucket_start, uint64_t count) {
  TimeSeries& series = series_[id];
  series.exists = true;
  series.bucket_width_ms = bucket_width_;
  series.total += count;
  if (count == 0) return;
  auto& pts = series.points;
  auto it = std::lower_bound(pts.begin(), pts.end(), bucket_start,
                             [](const auto& p, Millis t) { return p.first < t; });
  if (it != pts.end() && it->first == bucket_start) {
    it->second += count;
  } else {
    pts.insert(it, {bucket_start, count});
  }
}

void Snapshot::AddLatency(const std::string& group, const std::string& command,
                          const LatencyBucket& bucket) {
  LatencySummary& s = latency_[{group, command}];
  s.count += bucket.count;
  s.sum_ms += bucket.sum_ms;
  s.max_ms = std::max(s.max_ms, bucket.max_ms);
  s.buckets.push_back(bucket);
}

uint64_t Snapshot::Total(const MetricId& id) const {
  auto it = series_.find(id);
  return it == series_.end() ? 0 : it->second.total;
}

const TimeSeries* Snapshot::Find(const MetricId& id) const {
  auto it = series_.find(id);
  return it == series_.end() ? nullptr : &it->second;
}

LatencySummary Snapshot::Latency(const std::string& group, const std::string& command) const {
  auto it = latency_.find({group, command});
  return it == latency_.end() ? LatencySummary{} : it->second;
}

bool Snapshot::HasCommand(const std::string& group, const std::string& command) const {
  auto it = series_.lower_bound(MetricId{group, command, Outcome::kNone});
  return it != series_.end() && it->first.group == group && it->first.name == command;
}

nlohmann::json Snapshot::ToJson() const {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& [id, ts] : series_) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& [t, c] : ts.points) points.push_back({ToWireMillis(t), c});
    series.push_back({{"group", id.group},
                      {"name", id.name},
                      {"outcome", OutcomeName(id.outcome)},
                      {"total", ts.total},
                      {"points", std::move(points)}});
  }
  nlohmann::json latency = nlohmann::json::array();
  for (const auto& [key, summary] : latency_) {
    nlohmann::json buckets = nlohmann::json::array();
    for (const auto& b : summary.buckets) {
      buckets.push_back({{"start_ms", ToWireMillis(b.start)},
                         {"count", b.count},
                         {"mean_ms", b.count ? b.sum_ms / static_cast<double>(b.count) : 0.0},
                         {"max_ms", b.max_ms}});
    }
    latency.push_back({{"group", key.first},
                       {"command", key.second},
                       {"count", summary.count},
                       {"mean_ms", summary.mean_ms().value_or(0.0)},
                       {"max_ms", summary.max_ms},
                       {"buckets", std::move(buckets)}});
  }
  return {{"schema_version", kSchemaVersion},
          {"window", {{"from_ms", ToWireMillis(from_)}, {"to_ms", ToWireMillis(to_)}}},
          {"bucket_width_ms", ToWireMillis(bucket_width_)},
          {"series", std::move(series)},
          {"latency", std::move(latency)}};
}

absl::StatusOr<Snapshot> Snapshot::FromJson(const nlohmann::json& doc) {
  if (auto st = CheckSchemaVersion(doc); !st.ok()) return st;
  try {
    Snapshot snap(doc.at("window").at("from_ms").get<double>(),
                  doc.at("window").at("to_ms").get<double>(),
                  doc.at("bucket_width_ms").get<double>());
    for (const auto& s : doc.at("series")) {
      auto outcome = ParseOutcome(s.at("outcome").get<std::string>());
      if (!outcome) return CodedError("invalid_field", "unknown outcome in snapshot");
      MetricId id{s.at("group").get<std::string>(), s.at("name").get<std::string>(), *outcome};
      auto& ts = snap.series_[id];
      ts.exists = true;
      ts.bucket_width_ms = snap.bucket_width_;
      for (const auto& p : s.at("points")) snap.Add(id, p.at(0).get<double>(), p.at(1).get<uint64_t>());
    }
    if (doc.contains("latency")) {
      for (const auto& l : doc.at("latency")) {
        for (const auto& b : l.at("buckets")) {
          LatencyBucket bucket;
          bucket.start = b.at("start_ms").get<double>();
          bucket.count = b.at("count").get<uint64_t>();
          bucket.sum_ms = b.at("mean_ms").get<double>() * static_cast<double>(bucket.count);
          bucket.max_ms = b.at("max_ms").get<double>();
          snap.AddLatency(l.at("group").get<std::string>(), l.at("command").get<std::string>(),
                          bucket);
        }
      }
    }
    return snap;
  } catch (const nlohmann::json::exception& e) {
    return CodedError("invalid_field", e.what());
  }
}

// ---------------------------------------------------------------------------
// MetricsStore

MetricsStore::MetricsStore(Millis bucket_width_ms) : bucket_width_(bucket_width_ms) {
  if (!(bucket_width_ms > 0)) throw std::invalid_argument("bucket width must be positive");
}

size_t MetricsStore::BucketIndex(Millis at) const {
  if (at < 0) throw std::invalid_argument("metric timestamp must be non-negative");
  return static_cast<size_t>(std::floor(at / bucket_width_));
}

size_t MetricsStore::FirstBucketAtOrAfter(Millis t) const {
  if (t <= 0) return 0;
  return static_cast<size_t>(std::ceil(t / bucket_width_));
}

void MetricsStore::Increment(const MetricId& id, Millis at, uint64_t by) {
  const size_t index = BucketIndex(at);
  std::lock_guard<std::mutex> lock(mu_);
  auto& buckets = counters_[id];
  if (buckets.size() <= index) buckets.resize(index + 1, 0);
  buckets[index] += by;
  max_bucket_ = std::max(max_bucket_, index);
  any_ = true;
}

void MetricsStore::RecordLatency(const std::string& group, const std::string& command, Millis at,
                                 Millis latency_ms) {
  const size_t index = BucketIndex(at);
  std::lock_guard<std::mutex> lock(mu_);
  auto& cells = latency_[{group, command}];
  if (cells.size() <= index) cells.resize(index + 1);
  LatencyCell& cell = cells[index];
  ++cell.count;
  cell.sum_ms += latency_ms;
  cell.max_ms = std::max(cell.max_ms, latency_ms);
  max_bucket_ = std::max(max_bucket_, index);
  any_ = true;
}

TimeSeries MetricsStore::SliceLocked(const std::vector<uint64_t>& buckets, Millis from,
                                     Millis to) const {
  TimeSeries out;
  out.exists = true;
  out.bucket_width_ms = bucket_width_;
  const size_t begin = FirstBucketAtOrAfter(from);
  const size_t end = std::min(buckets.size(), FirstBucketAtOrAfter(to));
  for (size_t i = begin; i < end; ++i) {
    if (buckets[i] == 0) continue;
    out.points.emplace_back(static_cast<Millis>(i) * bucket_width_, buckets[i]);
    out.total += buckets[i];
  }
  return out;
}

TimeSeries MetricsStore::QueryWindow(const MetricId& id, Millis from, Millis to) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = counters_.find(id);
  if (it == counters_.end()) {
    TimeSeries missing;
    missing.bucket_width_ms = bucket_width_;
    return missing;
  }
  if (to <= from) {
    TimeSeries empty;
    empty.exists = true;
    empty.bucket_width_ms = bucket_width_;
    return empty;
  }
  return SliceLocked(it->second, from, to);
}

uint64_t MetricsStore::Total(const MetricId& id, Millis from, Millis to) const {
  return QueryWindow(id, from, to).total;
}

uint64_t MetricsStore::LifetimeTotal(const MetricId& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = counters_.find(id);
  if (it == counters_.end()) return 0;
  uint64_t total = 0;
  for (uint64_t c : it->second) total += c;
  return total;
}

LatencySummary MetricsStore::LatencySliceLocked(const std::vector<LatencyCell>& cells,
                                                Millis from, Millis to) const {
  LatencySummary out;
  const size_t begin = FirstBucketAtOrAfter(from);
  const size_t end = std::min(cells.size(), FirstBucketAtOrAfter(to));
  for (size_t i = begin; i < end; ++i) {
    const LatencyCell& c = cells[i];
    if (c.count == 0) continue;
    out.count += c.count;
    out.sum_ms += c.sum_ms;
    out.max_ms = std::max(out.max_ms, c.max_ms);
    out.buckets.push_back({static_cast<Millis>(i) * bucket_width_, c.count, c.sum_ms, c.max_ms});
  }
  return out;
}

LatencySummary MetricsStore::QueryLatency(const std::string& group, const std::string& command,
                                          Millis from, Millis to) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = latency_.find({group, command});
  if (it == latency_.end() || to <= from) return {};
  return LatencySliceLocked(it->second, from, to);
}

SpsRate MetricsStore::ComputeSps(const std::string& group, Millis from, Millis to) const {
  if (!(to > from)) throw std::invalid_argument("SPS window must have positive length");
  SpsRate rate;
  rate.stream_starts = Total({group, std::string(kSpsMetric), Outcome::kNone}, from, to);
  rate.requests = Total({group, std::string(kRequestsMetric), Outcome::kNone}, from, to);
  rate.per_second = static_cast<double>(rate.stream_starts) / ((to - from) / kMillisPerSecond);
  if (rate.requests > 0) {
    rate.normalized = static_cast<double>(rate.stream_starts) / static_cast<double>(rate.requests);
  }
  return rate;
}

Snapshot MetricsStore::TakeSnapshot(Millis from, Millis to,
                                    const std::vector<std::string>& groups) const {
  auto wanted = [&groups](const std::string& g) {
    return groups.empty() || std::find(groups.begin(), groups.end(), g) != groups.end();
  };
  Snapshot snap(from, to, bucket_width_);
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto& [id, buckets] : counters_) {
    if (!wanted(id.group)) continue;
    TimeSeries ts = to > from ? SliceLocked(buckets, from, to) : TimeSeries{};
    // Record the series even when the window holds no counts, so existence
    // stays distinguishable from absence.
    snap.Add(id, from, 0);
    for (const auto& [t, c] : ts.points) snap.Add(id, t, c);
  }
  for (const auto& [key, cells] : latency_) {
    if (!wanted(key.first) || to <= from) continue;
    for (const auto& b : LatencySliceLocked(cells, from, to).buckets) {
      snap.AddLatency(key.first, key.second, b);
    }
  }
  return snap;
}

std::vector<MetricId> MetricsStore::ListMetrics() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<MetricId> ids;
  ids.reserve(counters_.size());
  for (const auto& [id, _] : counters_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::optional<Millis> MetricsStore::LastBucketStart() const {
  std::lock_guard<std::mutex> lock(mu_);
  if (!any_) return std::nullopt;
  return static_cast<Millis>(max_bucket_) * bucket_width_;
}

}  // namespace chaoslab::telemetry
