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
#include <vector>

#include "chaoslab/common/time.h"

namespace chaoslab {

// A treatment that was actually applied to one downstream call.
struct AppliedTreatment {
  std::string caller;
  std::string command;
  std::string kind;  // "error", "latency" or "error_and_latency"
  Millis at = 0;
};

// Per-request metadata shared by every hop of one request. Only
// injected_treatments changes after the request enters the mesh.
struct RequestContext {
  uint64_t request_id = 0;
  uint64_t user_id = 0;
  std::string server_group;
  // Set iff server_group is the experiment group of an active experiment.
  std::optional<std::string> experiment_tag;
  std::vector<AppliedTreatment> injected_treatments;
  Millis start_time = 0;
};

// How an injected treatment changes one primary call.
struct CallEffect {
  Millis delay_ms = 0;  // dispatch (or failure) happens this long after the call starts
  bool fails = false;   // the call fails with an injected error instead of dispatching
};

}  // namespace chaoslab
