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


// chaoslab: validate topologies, run simulations and experiments headless,
// render reports, or serve the control-plane API.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "chaoslab/analysis/report_table.h"
#include "chaoslab/api/server.h"
#include "chaoslab/common/document.h"
#include "chaoslab/common/strings.h"
#include "chaoslab/mesh/topology.h"
#include "chaoslab/orchestration/experiment_spec.h"
#include "chaoslab/orchestration/platform.h"
#include "chaoslab/orchestration/runner.h"

namespace {

namespace fs = std::filesystem;
namespace orch = chaoslab::orchestration;
using chaoslab::StatusMessage;

#ifndef CHAOSLAB_SCENARIO_DIR
#define CHAOSLAB_SCENARIO_DIR "scenarios"
#endif

// A path as given, with ".yaml" appended, or relative to the scenario dir or
// its experiments/ subdirectory.
std::string ResolveScenario(const std::string& name) {
  std::vector<fs::path> candidates = {name, name + ".yaml"};
  for (const char* dir : {static_cast<const char*>(std::getenv("CHAOSLAB_SCENARIO_DIR")),
                          CHAOSLAB_SCENARIO_DIR}) {
    if (dir == nullptr) continue;
    for (const fs::path& base : {fs::path(dir), fs::path(dir) / "experiments"}) {
      candidates.push_back(base / name);
      candidates.push_back(base / (name + ".yaml"));
    }
  }
  for (const auto& c : candidates) {
    std::error_code ec;
    if (fs::is_regular_file(c, ec)) return c.string();
  }
  return name;
}

int Fail(const absl::Status& status, int code = orch::kExitValidationFailure) {
  std::cerr << "error: " << StatusMessage(status) << "\n";
  return code;
}

int Emit(const nlohmann::json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << chaoslab::DumpDocument(doc);
    return 0;
  }
  if (absl::Status st = chaoslab::WriteDocumentFile(out_path, doc); !st.ok()) {
    std::cerr << "error: " << StatusMessage(st) << "\n";
    return 1;
  }
  std::cout << chaoslab::analysis::RenderReport(doc);
  return 0;
}

int Validate(const std::string& file, const std::string& scenario) {
  auto doc = chaoslab::LoadDocumentFile(ResolveScenario(file));
  if (!doc.ok()) return Fail(doc.status());
  if (doc->is_object() && doc->contains("injection_points")) {
    if (scenario.empty()) {
      std::cerr << "error: validating an experiment spec needs --scenario\n";
      return orch::kExitUsage;
    }
    auto spec = orch::SpecFromJson(*doc);
    if (!spec.ok()) return Fail(spec.status());
    auto topo = chaoslab::mesh::LoadTopologyFile(ResolveScenario(scenario));
    if (!topo.ok()) return Fail(topo.status());
    auto issues = orch::ValidateSpec(*spec, *topo);
    for (const auto& i : issues) std::cerr << i.code << ": " << i.message << "\n";
    if (!issues.empty()) return orch::kExitValidationFailure;
    std::cout << "ok: experiment " << spec->id << "\n";
    return 0;
  }
  auto topo = chaoslab::mesh::TopologyFromJson(*doc);
  if (!topo.ok()) return Fail(topo.status());
  if (absl::Status st = chaoslab::mesh::ValidateTopology(*topo); !st.ok()) return Fail(st);
  std::cout << "ok: topology " << topo->name << " (" << topo->services.size() << " services)\n";
  return 0;
}

absl::StatusOr<std::unique_ptr<orch::Platform>> MakePlatform(const std::string& scenario,
                                                             uint64_t seed) {
  auto topo = chaoslab::mesh::LoadTopologyFile(ResolveScenario(scenario));
  if (!topo.ok()) return topo.status();
  orch::PlatformOptions options;
  options.seed = seed;
  return orch::Platform::Create(std::move(*topo), options);
}

int Simulate(const std::string& scenario, uint64_t seed, std::optional<double> duration_s,
             const std::string& out_path) {
  auto platform = MakePlatform(scenario, seed);
  if (!platform.ok()) return Fail(platform.status());
  auto result = orch::RunSimulation(**platform, duration_s);
  if (!result.ok()) return Fail(result.status());
  return Emit(result->ToJson(), out_path);
}

int RunExperiment(const std::string& spec_path, const std::string& scenario, uint64_t seed,
                  const std::string& out_path) {
  auto spec = orch::LoadSpecFile(ResolveScenario(spec_path));
  if (!spec.ok()) return Fail(spec.status());
  auto platform = MakePlatform(scenario, seed);
  if (!platform.ok()) return Fail(platform.status());
  auto result = orch::RunExperimentOn(**platform, *spec);
  if (!result.ok()) return Fail(result.status());
  if (int rc = Emit(result->report, out_path); rc != 0) return rc;
  return result->exit_code;
}

std::atomic<bool> g_stop{false};

void OnSignal(int) { g_stop = true; }

std::string EnvOr(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

int Serve(const std::string& scenario, const std::string& clock, uint64_t seed, int port,
          const std::string& host, const std::string& ui_dir, double speedup) {
  auto mode = chaoslab::api::ParseClockMode(clock);
  if (!mode || *mode == chaoslab::api::ClockMode::kManual) {
    std::cerr << "error: clock must be sim or real, not " << clock << "\n";
    return orch::kExitUsage;
  }
  auto topo = chaoslab::mesh::LoadTopologyFile(ResolveScenario(scenario));
  if (!topo.ok()) return Fail(topo.status());
  orch::PlatformOptions options;
  options.seed = seed;
  options.bucket_width_ms = chaoslab::api::DefaultBucketWidth(*mode);
  auto platform = orch::Platform::Create(std::move(*topo), options);
  if (!platform.ok()) return Fail(platform.status());

  chaoslab::api::ServerOptions server_options;
  server_options.host = host;
  server_options.port = port;
  server_options.clock = *mode;
  server_options.sim_speedup = speedup;
  server_options.ui_dir = ui_dir;
  chaoslab::api::ApiServer server(std::move(*platform), server_options);
  auto bound = server.Start();
  if (!bound.ok()) return Fail(bound.status());
  std::cout << "serving " << scenario << " on http://" << host << ":" << *bound
            << "/api/v1 (clock " << clock << ")" << std::endl;

  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.Stop();
  return 0;
}

int Report(const std::string& path, bool as_json) {
  auto doc = chaoslab::LoadDocumentFile(path);
  if (!doc.ok()) return Fail(doc.status());
  if (as_json) {
    std::cout << chaoslab::DumpDocument(*doc);
  } else {
    std::cout << chaoslab::analysis::RenderReport(*doc);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chaoslab: failure-injection experiments on a simulated service mesh"};
  app.require_subcommand(1);

  std::string file, scenario, out_path, spec_path, report_path;
  uint64_t seed = 42;
  std::optional<double> duration_s;
  bool as_json = false;

  auto* validate = app.add_subcommand("validate", "Validate a topology, or a spec with --scenario");
  validate->add_option("file", file, "Topology or experiment spec")->required();
  validate->add_option("--scenario", scenario, "Topology to validate a spec against");

  auto* simulate = app.add_subcommand("simulate", "Run a scenario's traffic and snapshot telemetry");
  simulate->add_option("scenario", scenario, "Topology file or scenario name")->required();
  simulate->add_option("--seed", seed, "Random seed");
  simulate->add_option("--duration", duration_s, "Traffic duration in seconds");
  simulate->add_option("--out", out_path, "Write the snapshot here instead of stdout");

  auto* experiment = app.add_subcommand("experiment", "Experiment commands");
  experiment->require_subcommand(1);
  auto* run = experiment->add_subcommand("run", "Run an experiment headless");
  run->add_option("spec", spec_path, "Experiment spec")->required();
  run->add_option("--scenario", scenario, "Topology file or scenario name")->required();
  run->add_option("--seed", seed, "Random seed");
  run->add_option("--out", out_path, "Write the report here instead of stdout");

  auto* report = app.add_subcommand("report", "Render a report file");
  report->add_option("file", report_path, "Report document")->required();
  report->add_flag("--json", as_json, "Print the document instead of a table");

  std::string serve_scenario = EnvOr("CHAOSLAB_SCENARIO", "gallery");
  std::string clock = EnvOr("CHAOSLAB_CLOCK", "sim");
  std::string host = "127.0.0.1";
  std::string ui_dir;
  int port = 8080;
  uint64_t serve_seed = 42;
  double speedup = 60;
  try {
    port = std::stoi(EnvOr("CHAOSLAB_PORT", "8080"));
    serve_seed = std::stoull(EnvOr("CHAOSLAB_SEED", "42"));
  } catch (const std::exception&) {
    std::cerr << "error: CHAOSLAB_PORT and CHAOSLAB_SEED must be integers\n";
    return orch::kExitUsage;
  }
  auto* serve = app.add_subcommand("serve", "Serve the control-plane API");
  serve->add_option("--scenario", serve_scenario, "Topology file or scenario name");
  serve->add_option("--clock", clock, "sim or real");
  serve->add_option("--seed", serve_seed, "Random seed");
  serve->add_option("--port", port, "TCP port (0 picks one)");
  serve->add_option("--host", host, "Address to bind");
  serve->add_option("--ui-dir", ui_dir, "Built dashboard assets to serve under /ui");
  serve->add_option("--speedup", speedup, "Simulated seconds per wall second with --clock sim");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : orch::kExitUsage;
  }

  if (*validate) return Validate(file, scenario);
  if (*simulate) return Simulate(scenario, seed, duration_s, out_path);
  if (*run) return RunExperiment(spec_path, scenario, seed, out_path);
  if (*report) return Report(report_path, as_json);
  if (*serve) return Serve(serve_scenario, clock, serve_seed, port, host, ui_dir, speedup);
  return orch::kExitUsage;
}
