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

#include <cstdint>
#include <deque>
#include <string_view>

#include "chaoslab/common/time.h"
#include "chaoslab/resilience/command_config.h"

namespace chaoslab::resilience {

enum class BreakerPhase : uint8_t { kClosed, kOpen, kHalfOpen };

std::string_view BreakerPhaseName(BreakerPhase phase);

// The only four edges the breaker may take:
//   closed -> open        error fraction reached the threshold
//   open -> half_open     cooldown elapsed
//   half_open -> closed   probe succeeded
//   half_open -> open     probe failed
bool IsLegalBreakerTransition(BreakerPhase from, BreakerPhase to);

struct BreakerSample {
  Millis at = 0;
  bool error = false;
};

struct BreakerState {
  BreakerPhase phase = BreakerPhase::kClosed;
  // Rolling window of primary-call results, oldest first.
  std::deque<BreakerSample> window;
  uint64_t window_errors = 0;
  Millis opened_at = 0;
  // In half_open, set while the single probe call is outstanding.
  bool probe_in_flight = false;
};

// Pure transition function. Samples older than breaker_window are evicted
// first; then a closed breaker trips when at least breaker_min_volume samples
// remain and errors/total >= breaker_error_threshold, and an open breaker
// moves to half_open once now - opened_at >= breaker_cooldown.
BreakerState EvaluateBreaker(BreakerState state, const CommandConfig& config, Millis now);

// Folds one primary-call result into the state. In half_open the result is
// the probe's and decides closed vs open; in open it is a straggler from
// before the trip and is ignored.
BreakerState RecordBreakerResult(BreakerState state, const CommandConfig& config, Millis now,
                                 bool error);

}  // namespace chaoslab::resilience
