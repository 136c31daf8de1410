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
#include <optional>
#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "chaoslab/common/time.h"

namespace chaoslab::resilience {

enum class FallbackKind : uint8_t { kStaticValue, kAlternateServiceCall, kBroken };

std::string_view FallbackKindName(FallbackKind kind);
std::optional<FallbackKind> ParseFallbackKind(std::string_view name);

// What a command serves when its primary call fails. Static values always
// succeed, broken fallbacks always fail, and an alternate service call
// succeeds iff that call does.
struct FallbackSpec {
  FallbackKind kind = FallbackKind::kBroken;
  std::optional<std::string> alternate_target;  // set iff kind == kAlternateServiceCall
};

absl::Status ValidateFallback(const FallbackSpec& fallback);

struct CommandConfig {
  std::string command_name;
  Millis timeout_ms = 1000;
  double breaker_error_threshold = 0.5;
  Millis breaker_window_ms = 10'000;
  uint32_t breaker_min_volume = 20;
  Millis breaker_cooldown_ms = 5'000;
};

absl::Status ValidateCommandConfig(const CommandConfig& config);

}  // namespace chaoslab::resilience
