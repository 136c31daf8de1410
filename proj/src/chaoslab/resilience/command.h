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

// Command wrapper around every RPC edge: timeout, fallback, circuit breaker
// and the three-way outcome accounting (success / fallback_success /
// fallback_failure) per (server group, command).

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chaoslab/common/event_loop.h"
#include "chaoslab/common/request_context.h"
#include "chaoslab/resilience/breaker.h"
#include "chaoslab/resilience/command_config.h"
#include "chaoslab/telemetry/metrics_store.h"

namespace chaoslab::resilience {

enum class OutcomeKind : uint8_t { kSuccess, kFallbackSuccess, kFallbackFailure };

enum class ErrorClass : uint8_t {
  kInjectedError,
  kIntrinsicError,
  kTimeout,
  kOverload,
  kShortCircuit,
};

std::string_view OutcomeKindName(OutcomeKind kind);
std::string_view ErrorClassName(ErrorClass error);

struct CommandOutcome {
  OutcomeKind kind = OutcomeKind::kSuccess;
  // Absent iff kind == kSuccess.
  std::optional<ErrorClass> primary_error;
  Millis latency_ms = 0;
  // The primary call succeeded but something below it served a fallback.
  bool downstream_degraded = false;
  bool injected_error = false;
  bool injected_latency = false;
};

// Result of a primary or alternate call, delivered at the scheduler's
// current time.
struct CallResult {
  bool ok = true;
  ErrorClass error = ErrorClass::kIntrinsicError;
  bool degraded = false;
};

using CallCompletion = std::function<void(CallResult)>;
// Starts a call at the scheduler's current time; must invoke the completion
// exactly once, at the call's completion time.
using AsyncCall = std::function<void(CallCompletion)>;

struct BreakerTransition {
  std::string group;
  std::string command;
  BreakerPhase from;
  BreakerPhase to;
  Millis at;
};

// Runs commands on a shared scheduler. Breakers are kept per
// (server group, command); every finished command increments exactly one of
// the three outcome counters in telemetry.
class CommandExecutor {
 public:
  CommandExecutor(Scheduler& scheduler, telemetry::MetricsStore& metrics);

  CommandExecutor(const CommandExecutor&) = delete;
  CommandExecutor& operator=(const CommandExecutor&) = delete;

  // If the breaker is open the primary is skipped (short_circuit) and the
  // fallback runs. Otherwise the injected effect, if any, is applied and the
  // primary runs under the timeout; an error or timeout runs the fallback.
  // Fallbacks are not wrapped again: an alternate call's failure is final.
  void Execute(const CommandConfig& config, const RequestContext& ctx,
               std::optional<CallEffect> effect, AsyncCall primary, const FallbackSpec& fallback,
               AsyncCall alternate, std::function<void(const CommandOutcome&)> done);

  BreakerState Breaker(const std::string& group, const std::string& command) const;
  std::vector<BreakerTransition> transitions() const;
  uint64_t Executions(const std::string& group, const std::string& command) const;
  std::map<std::pair<std::string, std::string>, uint64_t> AllExecutions() const;

 private:
  struct Call;

  // Returns true if the primary may run; sets *probe when this call is the
  // half-open probe.
  bool AdmitLocked(const CommandConfig& config, const std::string& group, Millis now, bool* probe);
  void RecordPrimary(const Call& call, bool error);
  void NoteTransitionLocked(const std::string& group, const std::string& command,
                            BreakerPhase before, BreakerPhase after, Millis now);
  void RunFallback(const std::shared_ptr<Call>& call, ErrorClass error);
  void Finish(const std::shared_ptr<Call>& call, OutcomeKind kind);

  Scheduler& scheduler_;
  telemetry::MetricsStore& metrics_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, BreakerState> breakers_;
  std::map<std::pair<std::string, std::string>, uint64_t> executions_;
  std::vector<BreakerTransition> transitions_;
};

// Convenience for a primary with a known latency and result: completes
// `latency_ms` after it starts.
AsyncCall FixedCall(Scheduler& scheduler, Millis latency_ms, CallResult result);

// Runs one command to completion on `loop` and returns its outcome.
CommandOutcome ExecuteCommand(CommandExecutor& executor, EventLoop& loop,
                              const CommandConfig& config, const RequestContext& ctx,
                              std::optional<CallEffect> effect, AsyncCall primary,
                              const FallbackSpec& fallback, AsyncCall alternate = nullptr);

}  // namespace chaoslab::resilience
