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

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define CHAOSLAB_RETURN_IF_ERROR(expr)         \
  do {                                         \
    if (absl::Status _st = (expr); !_st.ok()) { \
      return _st;                              \
    }                                          \
  } while (false)

#define CHAOSLAB_CONCAT_INNER(a, b) a##b
#define CHAOSLAB_CONCAT(a, b) CHAOSLAB_CONCAT_INNER(a, b)

#define CHAOSLAB_ASSIGN_OR_RETURN_IMPL(tmp, lhs, expr) \
  auto tmp = (expr);                                   \
  if (!tmp.ok()) return tmp.status();                  \
  lhs = *std::move(tmp)

// lhs may be a declaration: CHAOSLAB_ASSIGN_OR_RETURN(auto x, Foo());
#define CHAOSLAB_ASSIGN_OR_RETURN(lhs, expr) \
  CHAOSLAB_ASSIGN_OR_RETURN_IMPL(CHAOSLAB_CONCAT(_status_or_, __LINE__), lhs, expr)
