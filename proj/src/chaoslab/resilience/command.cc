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

#include "chaoslab/resilience/command.h"

#include <utility>

namespace chaoslab::resilience {

using telemetry::MetricId;
using telemetry::Outcome;

std::string_view OutcomeKindName(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::kSuccess:
      return "success";
    case OutcomeKind::kFallbackSuccess:
      return "fallback_success";
    case OutcomeKind::kFallbackFailure:
      return "fallback_failure";
  }
  return "success";
}

std::string_view ErrorClassName(ErrorClass error) {
  switch (error) {
    case ErrorClass::kInjectedError:
      return "injected_error";
    case ErrorClass::kIntrinsicError:
      return "intrinsic_error";
    case ErrorClass::kTimeout:
      return "timeout";
    case ErrorClass::kOverload:
      return "overload";
    case ErrorClass::kShortCircuit:
      return "short_circuit";
  }
  return "intrinsic_error";
}

struct CommandExecutor::Call {
  CommandConfig config;
  std::string group;
  FallbackSpec fallback;
  AsyncCall alternate;
  std::function<void(const CommandOutcome&)> done;
  Millis started_at = 0;
  bool probe = false;
  // Set once the primary phase is decided (result, injected error or
  // timeout); anything arriving later is an orphan and is dropped.
  bool settled = false;
  CommandOutcome outcome;
};

CommandExecutor::CommandExecutor(Scheduler& scheduler, telemetry::MetricsStore& metrics)
    : scheduler_(scheduler), metrics_(metrics) {}

void CommandExecutor::NoteTransitionLocked(const std::string& group, const std::string& command,
                                           BreakerPhase before, BreakerPhase after, Millis now) {
  if (before != after) transitions_.push_back({group, command, before, after, now});
}

bool CommandExecutor::AdmitLocked(const CommandConfig& config, const std::string& group,
                                  Millis now, bool* probe) {
  BreakerState& state = breakers_[{group, config.command_name}];
  const BreakerPhase before = state.phase;
  state = EvaluateBreaker(std::move(state), config, now);
  NoteTransitionLocked(group, config.command_name, before, state.phase, now);
  switch (state.phase) {
    case BreakerPhase::kClosed:
      return true;
    case BreakerPhase::kOpen:
      return false;
    case BreakerPhase::kHalfOpen:
      if (state.probe_in_flight) return false;
      state.probe_in_flight = true;
      *probe = true;
      return true;
  }
  return false;
}

void CommandExecutor::RecordPrimary(const Call& call, bool error) {
  const Millis now = scheduler_.Now();
  std::lock_guard<std::mutex> lock(mu_);
  BreakerState& state = breakers_[{call.group, call.config.command_name}];
  // Only the probe decides a half-open breaker; results of calls admitted
  // before a trip are ignored once the breaker has left closed.
  const bool counts = call.probe ? state.phase == BreakerPhase::kHalfOpen
                                 : state.phase == BreakerPhase::kClosed;
  if (!counts) return;
  const BreakerPhase before = state.phase;
  state = RecordBreakerResult(std::move(state), call.config, now, error);
  NoteTransitionLocked(call.group, call.config.command_name, before, state.phase, now);
}

void CommandExecutor::Execute(const CommandConfig& config, const RequestContext& ctx,
                              std::optional<CallEffect> effect, AsyncCall primary,
                              const FallbackSpec& fallback, AsyncCall alternate,
                              std::function<void(const CommandOutcome&)> done) {
  const Millis now = scheduler_.Now();
  auto call = std::make_shared<Call>();
  call->config = config;
  call->group = ctx.server_group;
  call->fallback = fallback;
  call->alternate = std::move(alternate);
  call->done = std::move(done);
  call->started_at = now;

  bool admitted;
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++executions_[{call->group, config.command_name}];
    admitted = AdmitLocked(config, call->group, now, &call->probe);
  }
  if (!admitted) {
    call->settled = true;
    RunFallback(call, ErrorClass::kShortCircuit);
    return;
  }

  auto on_primary = [this, call](CallResult result) {
    if (call->settled) return;
    call->settled = true;
    RecordPrimary(*call, !result.ok);
    if (result.ok) {
      call->outcome.downstream_degraded = result.degraded;
      Finish(call, OutcomeKind::kSuccess);
    } else {
      RunFallback(call, result.error);
    }
  };

  scheduler_.Schedule(
      now + config.timeout_ms,
      [this, call] {
        if (call->settled) return;
        call->settled = true;
        RecordPrimary(*call, /*error=*/true);
        RunFallback(call, ErrorClass::kTimeout);
      },
      EventPriority::kDeadline);

  if (!effect) {
    primary(on_primary);
    return;
  }

  if (effect->delay_ms > 0) {
    call->outcome.injected_latency = true;
    metrics_.Increment({call->group, config.command_name, Outcome::kInjectedLatency}, now);
  }
  if (effect->fails) {
    call->outcome.injected_error = true;
    metrics_.Increment({call->group, config.command_name, Outcome::kInjectedError}, now);
    scheduler_.Schedule(now + effect->delay_ms, [on_primary] {
      on_primary(CallResult{false, ErrorClass::kInjectedError, false});
    });
  } else {
    // The delayed call is abandoned if the caller has already timed out.
    scheduler_.Schedule(now + effect->delay_ms,
                        [call, primary = std::move(primary), on_primary]() mutable {
                          if (call->settled) return;
                          primary(on_primary);
                        });
  }
}

void CommandExecutor::RunFallback(const std::shared_ptr<Call>& call, ErrorClass error) {
  call->outcome.primary_error = error;
  switch (call->fallback.kind) {
    case FallbackKind::kStaticValue:
      Finish(call, OutcomeKind::kFallbackSuccess);
      return;
    case FallbackKind::kBroken:
      Finish(call, OutcomeKind::kFallbackFailure);
      return;
    case FallbackKind::kAlternateServiceCall:
      if (!call->alternate) {
        Finish(call, OutcomeKind::kFallbackFailure);
        return;
      }
      call->alternate([this, call](CallResult result) {
        Finish(call, result.ok ? OutcomeKind::kFallbackSuccess : OutcomeKind::kFallbackFailure);
      });
      return;
  }
}

void CommandExecutor::Finish(const std::shared_ptr<Call>& call, OutcomeKind kind) {
  const Millis now = scheduler_.Now();
  CommandOutcome& out = call->outcome;
  out.kind = kind;
  out.latency_ms = now - call->started_at;
  if (kind == OutcomeKind::kSuccess) out.primary_error.reset();

  const std::string& command = call->config.command_name;
  Outcome counted = Outcome::kSuccess;
  if (kind == OutcomeKind::kFallbackSuccess) counted = Outcome::kFallbackSuccess;
  if (kind == OutcomeKind::kFallbackFailure) counted = Outcome::kFallbackFailure;
  metrics_.Increment({call->group, command, counted}, now);
  if (out.primary_error) {
    switch (*out.primary_error) {
      case ErrorClass::kShortCircuit:
        metrics_.Increment({call->group, command, Outcome::kShortCircuit}, now);
        break;
      case ErrorClass::kTimeout:
        metrics_.Increment({call->group, command, Outcome::kTimeout}, now);
        break;
      case ErrorClass::kOverload:
        metrics_.Increment({call->group, command, Outcome::kOverload}, now);
        break;
      case ErrorClass::kInjectedError:
      case ErrorClass::kIntrinsicError:
        break;
    }
  }
  metrics_.RecordLatency(call->group, command, now, out.latency_ms);

  auto done = std::move(call->done);
  call->done = nullptr;
  if (done) done(out);
}

BreakerState CommandExecutor::Breaker(const std::string& group, const std::string& command) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = breakers_.find({group, command});
  return it == breakers_.end() ? BreakerState{} : it->second;
}

std::vector<BreakerTransition> CommandExecutor::transitions() const {
  std::lock_guard<std::mutex> lock(mu_);
  return transitions_;
}

uint64_t CommandExecutor::Executions(const std::string& group, const std::string& command) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = executions_.find({group, command});
  return it == executions_.end() ? 0 : it->second;
}

std::map<std::pair<std::string, std::string>, uint64_t> CommandExecutor::AllExecutions() const {
  std::lock_guard<std::mutex> lock(mu_);
  return executions_;
}

AsyncCall FixedCall(Scheduler& scheduler, Millis latency_ms, CallResult result) {
  return [&scheduler, latency_ms, result](CallCompletion done) {
    scheduler.Schedule(scheduler.Now() + latency_ms,
                       [done = std::move(done), result] { done(result); });
  };
}

CommandOutcome ExecuteCommand(CommandExecutor& executor, EventLoop& loop,
                              const CommandConfig& config, const RequestContext& ctx,
                              std::optional<CallEffect> effect, AsyncCall primary,
                              const FallbackSpec& fallback, AsyncCall alternate) {
  bool finished = false;
  CommandOutcome result;
  executor.Execute(config, ctx, effect, std::move(primary), fallback, std::move(alternate),
                   [&](const CommandOutcome& outcome) {
                     result = outcome;
                     finished = true;
                   });
  while (!finished && loop.Step()) {
  }
  return result;
}

}  // namespace chaoslab::resilience
