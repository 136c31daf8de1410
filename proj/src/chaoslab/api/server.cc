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


#include "chaoslab/api/server.h"

#include <chrono>
#include <filesystem>
#include <utility>

#include "chaoslab/common/document.h"
#include "chaoslab/common/strings.h"
#include "chaoslab/injection/fault_injector.h"
#include "chaoslab/orchestration/orchestrator.h"
#include "chaoslab/routing/router.h"
#include "httplib.h"

namespace chaoslab::api {

using nlohmann::json;
using orchestration::ExperimentState;
using orchestration::Phase;
using telemetry::Outcome;

namespace {

constexpr char kJson[] = "application/json";
constexpr char kPrefix[] = "/api/v1";

void SendJson(httplib::Response& res, int status, const json& doc) {
  res.status = status;
  res.set_content(doc.dump(), kJson);
}

void SendError(httplib::Response& res, int status, std::string_view code, std::string_view message,
               const json& details = nullptr) {
  SendJson(res, status, ApiErrorJson(code, message, details));
}

// Splits "code: message".
std::pair<std::string, std::string> SplitStatus(const absl::Status& st) {
  const std::string_view code = ErrorCode(st);
  std::string_view msg = StatusMessage(st);
  if (!code.empty()) msg.remove_prefix(code.size() + 2);
  return {code.empty() ? "internal" : std::string(code), std::string(msg)};
}

void SendStatus(httplib::Response& res, const absl::Status& st, const json& details = nullptr) {
  auto [code, msg] = SplitStatus(st);
  SendError(res, HttpStatusFor(st), code, msg, details);
}

json WeightsJson(const std::vector<std::pair<std::string, double>>& weights) {
  json out = json::object();
  for (const auto& [g, w] : weights) out[g] = w;
  return out;
}

json GroupJson(const routing::ServerGroup& g) {
  return json{{"name", g.name},
              {"cluster", g.cluster},
              {"kind", routing::GroupKindName(g.kind)},
              {"software_version", g.software_version},
              {"experiment_id", g.experiment_id ? json(*g.experiment_id) : json(nullptr)}};
}

std::optional<Millis> QueryMillis(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  try {
    return static_cast<Millis>(std::stoll(req.get_param_value(key)));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::optional<ClockMode> ParseClockMode(std::string_view name) {
  if (name == "sim") return ClockMode::kSim;
  if (name == "real") return ClockMode::kReal;
  if (name == "manual") return ClockMode::kManual;
  return std::nullopt;
}

std::string_view ClockModeName(ClockMode mode) {
  switch (mode) {
    case ClockMode::kSim:
      return "sim";
    case ClockMode::kReal:
      return "real";
    case ClockMode::kManual:
      return "manual";
  }
  return "sim";
}

Millis DefaultBucketWidth(ClockMode mode) {
  return mode == ClockMode::kReal ? 5 * kMillisPerSecond : kMillisPerSecond;
}

json ApiErrorJson(std::string_view code, std::string_view message, const json& details) {
  json error{{"code", code}, {"message", message}};
  if (!details.is_null()) error["details"] = details;
  return json{{"schema_version", kSchemaVersion}, {"error", error}};
}

int HttpStatusFor(const absl::Status& status) {
  const std::string_view code = ErrorCode(status);
  if (code == "not_found") return 404;
  if (code == "cluster_busy" || code == "invalid_phase" || code == "duplicate_id") return 409;
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return 200;
    case absl::StatusCode::kNotFound:
      return 404;
    case absl::StatusCode::kAlreadyExists:
    case absl::StatusCode::kFailedPrecondition:
      return 409;
    case absl::StatusCode::kInvalidArgument:
      return 400;
    case absl::StatusCode::kUnavailable:
      return 503;
    default:
      return 500;
  }
}

ApiServer::ApiServer(std::unique_ptr<orchestration::Platform> platform, ServerOptions options)
    : platform_(std::move(platform)),
      options_(std::move(options)),
      http_(std::make_unique<httplib::Server>()) {
  const mesh::Topology& topo = platform_->topology();
  if (topo.traffic) {
    platform_->mesh().SchedulePoissonTraffic(topo.traffic->rate_per_s, topo.traffic->users,
                                             platform_->loop().Now());
  }
  ScheduleBucketTick(platform_->loop().Now() + platform_->metrics().bucket_width());
  RegisterRoutes();
}

ApiServer::~ApiServer() { Stop(); }

absl::StatusOr<int> ApiServer::Start() {
  if (started_) return port_;
  if (!options_.ui_dir.empty() && !http_->set_mount_point("/ui", options_.ui_dir)) {
    return absl::NotFoundError(StrCat("ui_dir_missing: ", options_.ui_dir));
  }
  if (options_.port == 0) {
    port_ = http_->bind_to_any_port(options_.host);
  } else {
    port_ = http_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ < 0) {
    return absl::UnavailableError(
        StrCat("port_busy: cannot bind ", options_.host, ":", options_.port));
  }
  started_ = true;
  listen_thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  if (options_.clock != ClockMode::kManual) driver_thread_ = std::thread([this] { DriveClock(); });
  return port_;
}

void ApiServer::Stop() {
  if (!started_) return;
  stopping_ = true;
  stream_cv_.notify_all();
  http_->stop();
  if (listen_thread_.joinable()) listen_thread_.join();
  if (driver_thread_.joinable()) driver_thread_.join();
  started_ = false;
}

void ApiServer::Advance(Millis ms) {
  std::lock_guard<std::mutex> lock(mu_);
  EventLoop& loop = platform_->loop();
  loop.RunUntil(loop.Now() + ms);
}

Millis ApiServer::Now() {
  std::lock_guard<std::mutex> lock(mu_);
  return platform_->loop().Now();
}

void ApiServer::DriveClock() {
  const double speed = options_.clock == ClockMode::kReal ? 1.0 : options_.sim_speedup;
  auto last = std::chrono::steady_clock::now();
  while (!stopping_) {
    std::this_thread::sleep_for(std::chrono::milliseconds(options_.driver_period_ms));
    const auto now = std::chrono::steady_clock::now();
    const double wall_ms = std::chrono::duration<double, std::milli>(now - last).count();
    last = now;
    Advance(wall_ms * speed);
  }
}

void ApiServer::ScheduleBucketTick(Millis at) {
  platform_->loop().Schedule(at, [this] { OnBucketTick(); }, EventPriority::kDeadline);
}

// Runs on the event loop with mu_ held.
void ApiServer::OnBucketTick() {
  orchestration::Orchestrator& orch = platform_->orchestrator();
  const Millis now = platform_->loop().Now();
  const Millis bw = platform_->metrics().bucket_width();
  for (const auto& e : orch.List()) {
    if (e.phase == Phase::kRunning) (void)orch.MonitorTick(e.spec.id);
  }
  for (const auto& e : orch.List()) {
    if (!e.started_at) continue;
    {
      std::lock_guard<std::mutex> lock(stream_mu_);
      if (streams_[e.spec.id].closed) continue;
    }
    PushEvent(e.spec.id, BucketDocument(e, now - bw, now), orchestration::IsTerminal(e.phase));
  }
  ScheduleBucketTick(now + bw);
}

json ApiServer::BucketDocument(const ExperimentState& e, Millis from, Millis to) {
  const telemetry::MetricsStore& m = platform_->metrics();
  json groups = json::object();
  const std::pair<const char*, const std::string*> roles[] = {{"control", &e.control_group},
                                                              {"experiment", &e.experiment_group}};
  for (const auto& [role, group] : roles) {
    json commands = json::object();
    for (const auto& cmd : e.spec.tracked_commands) {
      commands[cmd] = {{"success", m.Total({*group, cmd, Outcome::kSuccess}, from, to)},
                       {"fallback_success", m.Total({*group, cmd, Outcome::kFallbackSuccess}, from, to)},
                       {"fallback_failure", m.Total({*group, cmd, Outcome::kFallbackFailure}, from, to)}};
    }
    const uint64_t requests =
        m.Total({*group, std::string(telemetry::kRequestsMetric), Outcome::kNone}, from, to);
    const uint64_t starts =
        m.Total({*group, std::string(telemetry::kSpsMetric), Outcome::kNone}, from, to);
    groups[role] = {{"group", *group},
                    {"requests", requests},
                    {"stream_starts", starts},
                    {"sps", starts / ((to - from) / kMillisPerSecond)},
                    {"normalized_sps", requests ? json(static_cast<double>(starts) / requests)
                                                : json(nullptr)},
                    {"commands", commands}};
  }
  json doc{{"schema_version", kSchemaVersion},
           {"kind", "bucket"},
           {"experiment_id", e.spec.id},
           {"phase", orchestration::PhaseName(e.phase)},
           {"bucket_start_ms", ToWireMillis(from)},
           {"bucket_width_ms", ToWireMillis(to - from)},
           {"time_remaining_ms", e.ToJson(to)["time_remaining_ms"]},
           {"groups", groups}};
  auto live = platform_->orchestrator().LiveComparison(e.spec.id);
  if (live.ok()) {
    doc["cumulative"] = {
        {"sps_ratio", live->sps_ratio ? json(*live->sps_ratio) : json(nullptr)},
        {"experiment_fallback_failure_fraction",
         live->experiment_fallback_failure_fraction
             ? json(*live->experiment_fallback_failure_fraction)
             : json(nullptr)},
        {"samples", live->min_group_samples()}};
  }
  return doc;
}

void ApiServer::PushEvent(const std::string& id, const json& doc, bool close) {
  {
    std::lock_guard<std::mutex> lock(stream_mu_);
    Stream& s = streams_[id];
    s.events.push_back(StrCat("event: bucket\ndata: ", doc.dump(), "\n\n"));
    if (close) {
      s.events.push_back(StrCat("event: end\ndata: ",
                                json{{"experiment_id", id}, {"phase", doc["phase"]}}.dump(),
                                "\n\n"));
      s.closed = true;
    }
  }
  stream_cv_.notify_all();
}

void ApiServer::RegisterRoutes() {
  auto h = [this](void (ApiServer::*fn)(const httplib::Request&, httplib::Response&)) {
    return httplib::Server::Handler(
        [this, fn](const httplib::Request& req, httplib::Response& res) { (this->*fn)(req, res); });
  };
  const std::string p = kPrefix;
  const std::string exp = p + "/experiments/([^/]+)";
  http_->Get(p + "/clusters", h(&ApiServer::ListClusters));
  http_->Get(p + "/clusters/([^/]+)/routing", h(&ApiServer::GetRouting));
  http_->Post(p + "/experiments", h(&ApiServer::CreateExperiment));
  http_->Get(p + "/experiments", h(&ApiServer::ListExperiments));
  http_->Get(exp, h(&ApiServer::GetExperiment));
  http_->Post(exp + "/start", h(&ApiServer::StartExperiment));
  http_->Post(exp + "/abort", h(&ApiServer::AbortExperiment));
  http_->Get(exp + "/metrics", h(&ApiServer::GetMetrics));
  http_->Get(exp + "/report", h(&ApiServer::GetReport));
  http_->Get(exp + "/rules", h(&ApiServer::GetRules));
  http_->Get(exp + "/stream", h(&ApiServer::StreamExperiment));
  if (options_.ui_dir.empty()) {
    http_->Get("/ui(/.*)?", [](const httplib::Request&, httplib::Response& res) {
      SendError(res, 404, "ui_not_built", "start the server with --ui-dir to serve the dashboard");
    });
  }

  http_->set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 404) {
      SendError(res, 404, "not_found", StrCat("no route for ", req.method, " ", req.path));
    } else {
      SendError(res, res.status, "http_error", StrCat("status ", res.status));
    }
  });
  http_->set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "unknown exception";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          what = e.what();
        } catch (...) {
        }
        SendError(res, 500, "internal", what);
      });
}

void ApiServer::ListClusters(const httplib::Request&, httplib::Response& res) {
  std::lock_guard<std::mutex> lock(mu_);
  const mesh::Topology& topo = platform_->topology();
  json clusters = json::array();
  for (const auto& svc : topo.services) {
    json groups = json::array();
    for (const auto& g : platform_->groups().ListCluster(svc.name)) groups.push_back(GroupJson(g));
    json commands = json::array();
    for (const auto& e : svc.dependencies) {
      commands.push_back({{"command", e.command_name},
                          {"target", e.target},
                          {"criticality", mesh::CriticalityName(e.criticality)},
                          {"fallback", resilience::FallbackKindName(e.fallback.kind)},
                          {"timeout_ms", ToWireMillis(e.command.timeout_ms)}});
    }
    clusters.push_back({{"name", svc.name},
                        {"routed", svc.name == topo.routed_cluster},
                        {"groups", groups},
                        {"commands", commands}});
  }
  SendJson(res, 200,
           {{"schema_version", kSchemaVersion},
            {"scenario", topo.name},
            {"entry", topo.entry},
            {"routed_cluster", topo.routed_cluster},
            {"clusters", clusters}});
}

void ApiServer::GetRouting(const httplib::Request& req, httplib::Response& res) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::string cluster = req.matches[1];
  if (platform_->topology().Find(cluster) == nullptr) {
    return SendError(res, 404, "not_found", StrCat("unknown cluster ", cluster));
  }
  auto table = platform_->router().Table(cluster);
  if (!table) {
    return SendJson(res, 200,
                    {{"schema_version", kSchemaVersion},
                     {"cluster", cluster},
                     {"routed", false},
                     {"weights", {{routing::BaselineGroupName(cluster), 1.0}}}});
  }
  json order = json::array();
  for (const auto& [g, _] : table->weights) order.push_back(g);
  SendJson(res, 200,
           {{"schema_version", kSchemaVersion},
            {"cluster", cluster},
            {"routed", true},
            {"hash", routing::kRoutingHashName},
            {"salt", table->salt},
            {"order", order},
            {"weights", WeightsJson(table->weights)}});
}

void ApiServer::CreateExperiment(const httplib::Request& req, httplib::Response& res) {
  auto doc = ParseDocument(req.body);
  if (!doc.ok()) return SendStatus(res, doc.status());
  auto spec = orchestration::SpecFromJson(*doc);
  if (!spec.ok()) return SendStatus(res, spec.status());

  std::lock_guard<std::mutex> lock(mu_);
  orchestration::Orchestrator& orch = platform_->orchestrator();
  if (orch.Get(spec->id)) {
    return SendError(res, 409, "duplicate_id", StrCat("experiment ", spec->id, " exists"));
  }
  std::vector<orchestration::SpecIssue> issues = orchestration::ValidateSpec(
      *spec, platform_->topology(), platform_->options().max_divert, orch.BusyClusters());
  if (!issues.empty()) {
    return SendError(res, 422, "validation_failed",
                     StrCat(issues.size(), " issue(s); first: ", issues.front().code),
                     {{"issues", orchestration::IssuesToJson(issues)}});
  }
  auto id = orch.Create(*spec);
  if (!id.ok()) return SendStatus(res, id.status());
  auto validated = orch.Validate(*id);
  if (!validated.ok()) return SendStatus(res, validated.status());
  const Millis now = platform_->loop().Now();
  res.set_header("Location", StrCat(kPrefix, "/experiments/", *id));
  SendJson(res, 201,
           {{"schema_version", kSchemaVersion},
            {"id", *id},
            {"experiment", orch.Get(*id)->ToJson(now)}});
}

void ApiServer::ListExperiments(const httplib::Request&, httplib::Response& res) {
  std::lock_guard<std::mutex> lock(mu_);
  const Millis now = platform_->loop().Now();
  json list = json::array();
  for (const auto& e : platform_->orchestrator().List()) list.push_back(e.ToJson(now));
  SendJson(res, 200, {{"schema_version", kSchemaVersion}, {"now_ms", ToWireMillis(now)},
                      {"experiments", list}});
}

void ApiServer::GetExperiment(const httplib::Request& req, httplib::Response& res) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::string id = req.matches[1];
  auto e = platform_->orchestrator().Get(id);
  if (!e) return SendError(res, 404, "not_found", StrCat("experiment ", id));
  SendJson(res, 200, e->ToJson(platform_->loop().Now()));
}

void ApiServer::StartExperiment(const httplib::Request& req, httplib::Response& res) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::string id = req.matches[1];
  orchestration::Orchestrator& orch = platform_->orchestrator();
  absl::Status st = orch.Start(id);
  auto e = orch.Get(id);
  if (!st.ok()) return SendStatus(res, st, e ? e->ToJson(platform_->loop().Now()) : json());
  {
    std::lock_guard<std::mutex> slock(stream_mu_);
    streams_[id];
  }
  SendJson(res, 200, e->ToJson(platform_->loop().Now()));
}

void ApiServer::AbortExperiment(const httplib::Request& req, httplib::Response& res) {
  std::string reason = "manual_abort";
  if (!req.body.empty()) {
    auto doc = ParseDocument(req.body);
    if (!doc.ok()) return SendStatus(res, doc.status());
    auto r = OptionalString(*doc, "reason", reason, "abort");
    if (!r.ok()) return SendStatus(res, r.status());
    reason = *r;
  }
  std::lock_guard<std::mutex> lock(mu_);
  const std::string id = req.matches[1];
  orchestration::Orchestrator& orch = platform_->orchestrator();
  auto report = orch.Abort(id, reason);
  if (!report.ok()) return SendStatus(res, report.status());
  SendJson(res, 200, orch.Get(id)->ToJson(platform_->loop().Now()));
}

void ApiServer::GetMetrics(const httplib::Request& req, httplib::Response& res) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::string id = req.matches[1];
  auto e = platform_->orchestrator().Get(id);
  if (!e) return SendError(res, 404, "not_found", StrCat("experiment ", id));
  const telemetry::MetricsStore& m = platform_->metrics();
  const Millis bw = m.bucket_width();
  const Millis now = platform_->loop().Now();

  std::vector<std::string> groups = {e->control_group, e->experiment_group};
  if (req.has_param("group")) {
    std::string g = req.get_param_value("group");
    if (g == "control") g = e->control_group;
    if (g == "experiment") g = e->experiment_group;
    if (g == "baseline") g = e->baseline_group;
    groups = {g};
  }
  std::vector<std::pair<std::string, std::vector<Outcome>>> metrics;
  const std::vector<Outcome> counts = {Outcome::kSuccess, Outcome::kFallbackSuccess,
                                       Outcome::kFallbackFailure};
  std::optional<Outcome> only;
  if (req.has_param("outcome")) {
    only = telemetry::ParseOutcome(req.get_param_value("outcome"));
    if (!only) {
      return SendError(res, 400, "invalid_query",
                       StrCat("unknown outcome ", req.get_param_value("outcome")));
    }
  }
  auto outcomes_for = [&](const std::string& name) -> std::vector<Outcome> {
    if (only) return {*only};
    if (name == telemetry::kSpsMetric || name == telemetry::kRequestsMetric) {
      return {Outcome::kNone};
    }
    return counts;
  };
  if (req.has_param("command")) {
    const std::string c = req.get_param_value("command");
    metrics.push_back({c, outcomes_for(c)});
  } else {
    for (const auto& c : e->spec.tracked_commands) metrics.push_back({c, outcomes_for(c)});
    for (std::string_view c : {telemetry::kSpsMetric, telemetry::kRequestsMetric}) {
      metrics.push_back({std::string(c), outcomes_for(std::string(c))});
    }
  }

  const Millis default_from = orchestration::AlignDown(e->started_at.value_or(e->created_at), bw);
  const Millis default_to =
      e->teardown_at ? orchestration::AlignUp(*e->teardown_at, bw) : orchestration::AlignUp(now, bw);
  const Millis from = QueryMillis(req, "from_ms").value_or(default_from);
  const Millis to = QueryMillis(req, "to_ms").value_or(default_to);
  if (from > to) return SendError(res, 400, "invalid_query", "from_ms must be <= to_ms");

  json series = json::array();
  for (const auto& g : groups) {
    for (const auto& [name, outcomes] : metrics) {
      for (Outcome o : outcomes) {
        telemetry::TimeSeries ts = m.QueryWindow({g, name, o}, from, to);
        json points = json::array();
        for (const auto& [t, c] : ts.points) points.push_back({ToWireMillis(t), c});
        series.push_back({{"group", g},
                          {"command", name},
                          {"outcome", telemetry::OutcomeName(o)},
                          {"exists", ts.exists},
                          {"bucket_width_ms", ToWireMillis(bw)},
                          {"points", points},
                          {"total", ts.total}});
      }
    }
  }
  SendJson(res, 200,
           {{"schema_version", kSchemaVersion},
            {"experiment_id", id},
            {"window", {{"from_ms", ToWireMillis(from)}, {"to_ms", ToWireMillis(to)}}},
            {"series", series}});
}

void ApiServer::GetReport(const httplib::Request& req, httplib::Response& res) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::string id = req.matches[1];
  orchestration::Orchestrator& orch = platform_->orchestrator();
  if (!orch.Get(id)) return SendError(res, 404, "not_found", StrCat("experiment ", id));
  auto report = orch.Report(id);
  if (!report) {
    return SendError(res, 409, "report_not_ready",
                     StrCat("experiment ", id, " has not reached a terminal phase"));
  }
  SendJson(res, 200, *report);
}

void ApiServer::GetRules(const httplib::Request& req, httplib::Response& res) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::string id = req.matches[1];
  if (!platform_->orchestrator().Get(id)) {
    return SendError(res, 404, "not_found", StrCat("experiment ", id));
  }
  json rules = json::array();
  for (const auto& r : platform_->injector().Rules()) {
    if (r.experiment_id == id) rules.push_back(injection::RuleToJson(r));
  }
  SendJson(res, 200, {{"schema_version", kSchemaVersion}, {"experiment_id", id}, {"rules", rules}});
}

void ApiServer::StreamExperiment(const httplib::Request& req, httplib::Response& res) {
  const std::string id = req.matches[1];
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (!platform_->orchestrator().Get(id)) {
      return SendError(res, 404, "not_found", StrCat("experiment ", id));
    }
  }
  res.set_header("Cache-Control", "no-cache");
  // Replays every bucket so far, then follows until the experiment ends.
  res.set_chunked_content_provider(
      "text/event-stream", [this, id, next = size_t{0}](size_t, httplib::DataSink& sink) mutable {
        std::unique_lock<std::mutex> lock(stream_mu_);
        stream_cv_.wait_for(lock, std::chrono::milliseconds(200), [&] {
          const Stream& s = streams_[id];
          return stopping_.load() || next < s.events.size() || s.closed;
        });
        if (stopping_) return false;
        const Stream& s = streams_[id];
        while (next < s.events.size()) {
          const std::string& frame = s.events[next++];
          if (!sink.write(frame.data(), frame.size())) return false;
        }
        if (s.closed) sink.done();
        return true;
      });
}

}  // namespace chaoslab::api
