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

#include "chaoslab/common/event_loop.h"

#include <stdexcept>
#include <string>
#include <utility>

namespace chaoslab {

void EventLoop::Schedule(Millis at, std::function<void()> action,
                         EventPriority priority) {
  if (at < now_) {
    throw std::logic_error("event scheduled in the past: " + std::to_string(at) +
                           " < " + std::to_string(now_));
  }
  queue_.push(Event{at, priority, next_seq_++, std::move(action)});
}

bool EventLoop::Step() {
  if (queue_.empty()) return false;
  // top() is const; moving out is fine because the element is popped next.
  Event event = std::move(const_cast<Event&>(queue_.top()));
  queue_.pop();
  now_ = event.at;
  ++processed_;
  event.action();
  return true;
}

void EventLoop::RunUntil(Millis t) {
  while (!queue_.empty() && queue_.top().at <= t) Step();
  if (t > now_) now_ = t;
}

void EventLoop::Run() {
  while (Step()) {
  }
}

}  // namespace chaoslab
