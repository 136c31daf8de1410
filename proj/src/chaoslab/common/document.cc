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

#include "chaoslab/common/document.h"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "chaoslab/common/strings.h"

namespace chaoslab {
namespace {

bool IsJsonText(std::string_view text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '{' || c == '[';
  }
  return false;
}

nlohmann::json PlainScalar(const std::string& s) {
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;

  int64_t i = 0;
  auto [iend, iec] = std::from_chars(s.data(), s.data() + s.size(), i);
  if (iec == std::errc() && iend == s.data() + s.size()) return i;

  // strtod accepts things like "inf" and hex floats; YAML floats are plainer,
  // so require a leading digit, sign or dot.
  const char first = s.front();
  if (std::isdigit(static_cast<unsigned char>(first)) || first == '-' || first == '+' ||
      first == '.') {
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (end == s.c_str() + s.size()) return d;
  }
  return s;
}

nlohmann::json YamlToJson(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Undefined:
    case YAML::NodeType::Null:
      return nullptr;
    case YAML::NodeType::Scalar:
      // Quoted scalars are tagged "!" and are always strings.
      if (node.Tag() == "!") return node.Scalar();
      return PlainScalar(node.Scalar());
    case YAML::NodeType::Sequence: {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& item : node) out.push_back(YamlToJson(item));
      return out;
    }
    case YAML::NodeType::Map: {
      nlohmann::json out = nlohmann::json::object();
      for (const auto& kv : node) out[kv.first.Scalar()] = YamlToJson(kv.second);
      return out;
    }
  }
  return nullptr;
}

}  // namespace

absl::StatusOr<nlohmann::json> ParseDocument(std::string_view text) {
  if (IsJsonText(text)) {
    auto doc = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) return CodedError("parse_error", "malformed JSON document");
    return doc;
  }
  try {
    YAML::Node root = YAML::Load(std::string(text));
    return YamlToJson(root);
  } catch (const YAML::Exception& e) {
    return CodedError("parse_error", e.what());
  }
}

absl::StatusOr<nlohmann::json> LoadDocumentFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(StrCat("not_found: cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto doc = ParseDocument(buffer.str());
  if (!doc.ok()) {
    return absl::Status(doc.status().code(),
                        StrCat(StatusMessage(doc.status()), " (in ", path, ")"));
  }
  return doc;
}

std::string DumpDocument(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

absl::Status WriteDocumentFile(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::UnavailableError(StrCat("io_error: cannot write ", path));
  out << DumpDocument(doc);
  if (!out) return absl::UnavailableError(StrCat("io_error: short write to ", path));
  return absl::OkStatus();
}

std::string_view ErrorCode(const absl::Status& status) {
  std::string_view msg = StatusMessage(status);
  const size_t pos = msg.find(": ");
  if (pos == std::string_view::npos) return {};
  std::string_view code = msg.substr(0, pos);
  for (char c : code) {
    if (!(std::islower(static_cast<unsigned char>(c)) || c == '_')) return {};
  }
  return code;
}

absl::Status CodedError(std::string_view code, std::string_view message) {
  return absl::InvalidArgumentError(StrCat(code, ": ", message));
}

absl::Status CheckSchemaVersion(const nlohmann::json& doc) {
  if (!doc.is_object()) return CodedError("parse_error", "document root must be a mapping");
  auto it = doc.find("schema_version");
  if (it == doc.end()) return CodedError("missing_field", "schema_version");
  if (!it->is_number_integer() || it->get<int64_t>() != kSchemaVersion) {
    return CodedError("unsupported_schema_version",
                      StrCat("expected schema_version ", kSchemaVersion));
  }
  return absl::OkStatus();
}

namespace {

std::string FieldName(std::string_view where, std::string_view key) {
  return where.empty() ? std::string(key) : StrCat(where, ".", key);
}

// Returns the value or null if absent. Fails on a non-mapping container.
absl::StatusOr<const nlohmann::json*> Lookup(const nlohmann::json& obj, std::string_view key,
                                             std::string_view where) {
  if (!obj.is_object()) {
    return CodedError("invalid_field", StrCat(where.empty() ? "document" : where,
                                                    " must be a mapping"));
  }
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

}  // namespace

absl::StatusOr<std::string> RequireString(const nlohmann::json& obj, std::string_view key,
                                          std::string_view where) {
  auto v = Lookup(obj, key, where);
  if (!v.ok()) return v.status();
  if (*v == nullptr) return CodedError("missing_field", FieldName(where, key));
  if (!(*v)->is_string()) {
    return CodedError("invalid_field", StrCat(FieldName(where, key), " must be a string"));
  }
  return (*v)->get<std::string>();
}

absl::StatusOr<double> RequireNumber(const nlohmann::json& obj, std::string_view key,
                                     std::string_view where) {
  auto v = Lookup(obj, key, where);
  if (!v.ok()) return v.status();
  if (*v == nullptr) return CodedError("missing_field", FieldName(where, key));
  if (!(*v)->is_number()) {
    return CodedError("invalid_field", StrCat(FieldName(where, key), " must be a number"));
  }
  return (*v)->get<double>();
}

absl::StatusOr<int64_t> RequireInteger(const nlohmann::json& obj, std::string_view key,
                                       std::string_view where) {
  auto v = Lookup(obj, key, where);
  if (!v.ok()) return v.status();
  if (*v == nullptr) return CodedError("missing_field", FieldName(where, key));
  if (!(*v)->is_number_integer()) {
    return CodedError("invalid_field",
                      StrCat(FieldName(where, key), " must be an integer"));
  }
  return (*v)->get<int64_t>();
}

absl::StatusOr<std::string> OptionalString(const nlohmann::json& obj, std::string_view key,
                                           std::string fallback, std::string_view where) {
  auto v = Lookup(obj, key, where);
  if (!v.ok()) return v.status();
  if (*v == nullptr) return fallback;
  return RequireString(obj, key, where);
}

absl::StatusOr<double> OptionalNumber(const nlohmann::json& obj, std::string_view key,
                                      double fallback, std::string_view where) {
  auto v = Lookup(obj, key, where);
  if (!v.ok()) return v.status();
  if (*v == nullptr) return fallback;
  return RequireNumber(obj, key, where);
}

absl::StatusOr<int64_t> OptionalInteger(const nlohmann::json& obj, std::string_view key,
                                        int64_t fallback, std::string_view where) {
  auto v = Lookup(obj, key, where);
  if (!v.ok()) return v.status();
  if (*v == nullptr) return fallback;
  return RequireInteger(obj, key, where);
}

}  // namespace chaoslab
