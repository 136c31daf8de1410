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

#include "chaoslab/resilience/breaker.h"

#include <utility>

#include "chaoslab/common/document.h"
#include "chaoslab/common/strings.h"

namespace chaoslab::resilience {
namespace {

void Evict(BreakerState& state, Millis window, Millis now) {
  while (!state.window.empty() && now - state.window.front().at > window) {
    if (state.window.front().error) --state.window_errors;
    state.window.pop_front();
  }
}

void ClearWindow(BreakerState& state) {
  state.window.clear();
  state.window_errors = 0;
}

void Open(BreakerState& state, Millis now) {
  state.phase = BreakerPhase::kOpen;
  state.opened_at = now;
  state.probe_in_flight = false;
  ClearWindow(state);
}

}  // namespace

std::string_view FallbackKindName(FallbackKind kind) {
  switch (kind) {
    case FallbackKind::kStaticValue:
      return "static_value";
    case FallbackKind::kAlternateServiceCall:
      return "alternate_service_call";
    case FallbackKind::kBroken:
      return "broken";
  }
  return "broken";
}

std::optional<FallbackKind> ParseFallbackKind(std::string_view name) {
  if (name == "static_value" || name == "static-value") return FallbackKind::kStaticValue;
  if (name == "alternate_service_call" || name == "alternate-service-call") {
    return FallbackKind::kAlternateServiceCall;
  }
  if (name == "broken") return FallbackKind::kBroken;
  return std::nullopt;
}

absl::Status ValidateFallback(const FallbackSpec& fallback) {
  const bool wants_target = fallback.kind == FallbackKind::kAlternateServiceCall;
  if (wants_target && (!fallback.alternate_target || fallback.alternate_target->empty())) {
    return CodedError("invalid_fallback", "alternate_service_call requires alternate_target");
  }
  if (!wants_target && fallback.alternate_target) {
    return CodedError("invalid_fallback", "alternate_target is only valid for alternate_service_call");
  }
  return absl::OkStatus();
}

absl::Status ValidateCommandConfig(const CommandConfig& config) {
  if (config.command_name.empty()) return CodedError("invalid_command_config", "empty command name");
  const std::string& n = config.command_name;
  if (!(config.timeout_ms > 0)) {
    return CodedError("invalid_command_config", StrCat(n, ": timeout must be > 0"));
  }
  if (!(config.breaker_error_threshold > 0 && config.breaker_error_threshold <= 1)) {
    return CodedError("invalid_command_config",
                      StrCat(n, ": breaker_error_threshold must be in (0,1]"));
  }
  if (!(config.breaker_window_ms > 0)) {
    return CodedError("invalid_command_config", StrCat(n, ": breaker_window must be > 0"));
  }
  if (config.breaker_min_volume < 1) {
    return CodedError("invalid_command_config", StrCat(n, ": breaker_min_volume must be >= 1"));
  }
  if (!(config.breaker_cooldown_ms >= 0)) {
    return CodedError("invalid_command_config", StrCat(n, ": breaker_cooldown must be >= 0"));
  }
  return absl::OkStatus();
}

std::string_view BreakerPhaseName(BreakerPhase phase) {
  switch (phase) {
    case BreakerPhase::kClosed:
      return "closed";
    case BreakerPhase::kOpen:
      return "open";
    case BreakerPhase::kHalfOpen:
      return "half_open";
  }
  return "closed";
}

bool IsLegalBreakerTransition(BreakerPhase from, BreakerPhase to) {
  switch (from) {
    case BreakerPhase::kClosed:
      return to == BreakerPhase::kOpen;
    case BreakerPhase::kOpen:
      return to == BreakerPhase::kHalfOpen;
    case BreakerPhase::kHalfOpen:
      return to == BreakerPhase::kClosed || to == BreakerPhase::kOpen;
  }
  return false;
}

BreakerState EvaluateBreaker(BreakerState state, const CommandConfig& config, Millis now) {
  Evict(state, config.breaker_window_ms, now);
  switch (state.phase) {
    case BreakerPhase::kClosed: {
      const uint64_t total = state.window.size();
      if (total >= config.breaker_min_volume &&
          static_cast<double>(state.window_errors) >=
              config.breaker_error_threshold * static_cast<double>(total)) {
        Open(state, now);
      }
      break;
    }
    case BreakerPhase::kOpen:
      if (now - state.opened_at >= config.breaker_cooldown_ms) {
        state.phase = BreakerPhase::kHalfOpen;
        state.probe_in_flight = false;
      }
      break;
    case BreakerPhase::kHalfOpen:
      break;
  }
  return state;
}

BreakerState RecordBreakerResult(BreakerState state, const CommandConfig& config, Millis now,
                                 bool error) {
  switch (state.phase) {
    case BreakerPhase::kClosed:
      state.window.push_back({now, error});
      if (error) ++state.window_errors;
      return EvaluateBreaker(std::move(state), config, now);
    case BreakerPhase::kHalfOpen:
      if (error) {
        Open(state, now);
      } else {
        state.phase = BreakerPhase::kClosed;
        state.probe_in_flight = false;
        ClearWindow(state);
      }
      return state;
    case BreakerPhase::kOpen:
      return state;
  }
  return state;
}

}  // namespace chaoslab::resilience
