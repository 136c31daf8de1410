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


// HTTP/JSON control plane under /api/v1, a per-bucket event stream for the
// dashboard, and the dashboard's static files under /ui.

#pragma once

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chaoslab/common/time.h"
#include "chaoslab/orchestration/platform.h"
#include "json.hpp"

namespace httplib {
class Server;
struct Request;
struct Response;
}  // namespace httplib

namespace chaoslab::api {

// kSim runs simulated time faster than wall time, kReal at wall speed.
// kManual never advances on its own; callers use Advance.
enum class ClockMode : uint8_t { kSim, kReal, kManual };

std::optional<ClockMode> ParseClockMode(std::string_view name);
std::string_view ClockModeName(ClockMode mode);

// Simulated bucket width per clock mode: 1 s simulated, 5 s real time.
Millis DefaultBucketWidth(ClockMode mode);

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  ClockMode clock = ClockMode::kSim;
  double sim_speedup = 60;   // simulated ms per wall ms in kSim
  int driver_period_ms = 50;  // wall time between clock advances
  std::string ui_dir;         // empty: /ui answers ui_not_built
};

// Error body shared by every non-2xx response.
nlohmann::json ApiErrorJson(std::string_view code, std::string_view message,
                            const nlohmann::json& details = nullptr);
// HTTP status for a coded status.
int HttpStatusFor(const absl::Status& status);

class ApiServer {
 public:
  // Starts the scenario's background traffic at simulated time now.
  ApiServer(std::unique_ptr<orchestration::Platform> platform, ServerOptions options);
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds, then serves and drives the clock on background threads. Returns
  // the bound port.
  absl::StatusOr<int> Start();
  void Stop();

  // Moves simulated time forward, running monitor ticks and stream updates.
  void Advance(Millis ms);
  Millis Now();

  int port() const { return port_; }

 private:
  struct Stream {
    std::vector<std::string> events;
    bool closed = false;
  };

  void RegisterRoutes();
  void ScheduleBucketTick(Millis at);
  void OnBucketTick();
  nlohmann::json BucketDocument(const orchestration::ExperimentState& e, Millis from, Millis to);
  void PushEvent(const std::string& id, const nlohmann::json& doc, bool close);
  void DriveClock();

  void ListClusters(const httplib::Request& req, httplib::Response& res);
  void GetRouting(const httplib::Request& req, httplib::Response& res);
  void CreateExperiment(const httplib::Request& req, httplib::Response& res);
  void ListExperiments(const httplib::Request& req, httplib::Response& res);
  void GetExperiment(const httplib::Request& req, httplib::Response& res);
  void StartExperiment(const httplib::Request& req, httplib::Response& res);
  void AbortExperiment(const httplib::Request& req, httplib::Response& res);
  void GetMetrics(const httplib::Request& req, httplib::Response& res);
  void GetReport(const httplib::Request& req, httplib::Response& res);
  void GetRules(const httplib::Request& req, httplib::Response& res);
  void StreamExperiment(const httplib::Request& req, httplib::Response& res);

  std::unique_ptr<orchestration::Platform> platform_;
  const ServerOptions options_;
  std::unique_ptr<httplib::Server> http_;
  int port_ = 0;

  // Guards the platform: the event loop is single-threaded.
  std::mutex mu_;

  std::mutex stream_mu_;
  std::condition_variable stream_cv_;
  std::map<std::string, Stream> streams_;

  std::atomic<bool> stopping_{false};
  bool started_ = false;
  std::thread listen_thread_;
  std::thread driver_thread_;
};

}  // namespace chaoslab::api
