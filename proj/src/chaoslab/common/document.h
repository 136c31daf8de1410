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
#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"

namespace chaoslab {

// Every document the platform reads or writes carries this version.
inline constexpr int kSchemaVersion = 1;

// Parses a structured document. JSON text is parsed as JSON; anything else is
// parsed as YAML and converted (plain scalars become bool/int/float/null
// where they read as such, quoted scalars stay strings).
absl::StatusOr<nlohmann::json> ParseDocument(std::string_view text);

absl::StatusOr<nlohmann::json> LoadDocumentFile(const std::string& path);

// Canonical serialization: two-space indent, sorted keys, trailing newline.
std::string DumpDocument(const nlohmann::json& doc);

absl::Status WriteDocumentFile(const std::string& path, const nlohmann::json& doc);

// Statuses produced by this project put a machine-readable code before the
// first ": " of the message. Returns that prefix, or "" if there is none.
std::string_view ErrorCode(const absl::Status& status);

// Builds an InvalidArgument status carrying `code`.
absl::Status CodedError(std::string_view code, std::string_view message);

// Checks for the top-level schema_version field.
absl::Status CheckSchemaVersion(const nlohmann::json& doc);

// Typed field access on a mapping. A missing key is missing_field, a value of
// the wrong type is invalid_field. `where` names the enclosing object in
// messages, e.g. "services[2]".
absl::StatusOr<std::string> RequireString(const nlohmann::json& obj, std::string_view key,
                                          std::string_view where);
absl::StatusOr<double> RequireNumber(const nlohmann::json& obj, std::string_view key,
                                     std::string_view where);
absl::StatusOr<int64_t> RequireInteger(const nlohmann::json& obj, std::string_view key,
                                       std::string_view where);
absl::StatusOr<std::string> OptionalString(const nlohmann::json& obj, std::string_view key,
                                           std::string fallback, std::string_view where);
absl::StatusOr<double> OptionalNumber(const nlohmann::json& obj, std::string_view key,
                                      double fallback, std::string_view where);
absl::StatusOr<int64_t> OptionalInteger(const nlohmann::json& obj, std::string_view key,
                                        int64_t fallback, std::string_view where);

}  // namespace chaoslab
