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


#include "chaoslab/orchestration/platform.h"

#include <utility>

#include "chaoslab/common/status_macros.h"

namespace chaoslab::orchestration {

Platform::Platform(mesh::Topology topology, PlatformOptions options)
    : topology_(std::move(topology)),
      options_(options),
      metrics_(options.bucket_width_ms),
      router_(&groups_),
      injector_(topology_, groups_),
      executor_(loop_, metrics_),
      mesh_(topology_, loop_, router_, groups_, injector_, executor_, metrics_, options.seed),
      orchestrator_(topology_, loop_, metrics_, groups_, router_, injector_, options.max_divert) {}

absl::StatusOr<std::unique_ptr<Platform>> Platform::Create(mesh::Topology topology,
                                                           PlatformOptions options) {
  CHAOSLAB_RETURN_IF_ERROR(mesh::ValidateTopology(topology));
  std::unique_ptr<Platform> p(new Platform(std::move(topology), options));
  for (const auto& svc : p->topology_.services) {
    CHAOSLAB_RETURN_IF_ERROR(p->groups_.Add({routing::BaselineGroupName(svc.name), svc.name,
                                             routing::GroupKind::kBaseline,
                                             kBaselineSoftwareVersion, std::nullopt}));
  }
  const std::string& cluster = p->topology_.routed_cluster;
  CHAOSLAB_RETURN_IF_ERROR(
      p->router_.Install({cluster, {{routing::BaselineGroupName(cluster), 1.0}}, ""}));
  return p;
}

}  // namespace chaoslab::orchestration
