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

#include <cmath>
#include <cstdint>

namespace chaoslab {

// Timestamps and durations are milliseconds. In simulated mode the origin is
// the start of the run; in real-time mode it is the moment the mesh started.
using Millis = double;

inline constexpr Millis kMillisPerSecond = 1000.0;
inline constexpr Millis kMillisPerMinute = 60.0 * kMillisPerSecond;

// Documents carry integer milliseconds.
inline int64_t ToWireMillis(Millis t) { return static_cast<int64_t>(std::llround(t)); }

}  // namespace chaoslab
