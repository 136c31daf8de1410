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


// Plain-text rendering of report documents for the terminal.

#pragma once

#include <string>

#include "json.hpp"

namespace chaoslab::analysis {

// Renders an experiment, validation or simulation report. Unknown kinds are
// rendered as indented JSON.
std::string RenderReport(const nlohmann::json& report);

}  // namespace chaoslab::analysis
