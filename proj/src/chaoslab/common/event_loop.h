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
#include <functional>
#include <queue>
#include <vector>

#include "chaoslab/common/time.h"

namespace chaoslab {

// Events scheduled for the same instant run normal-priority first, so a call
// that completes exactly at its deadline is not reported as a timeout.
enum class EventPriority : uint8_t { kNormal = 0, kDeadline = 1 };

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual Millis Now() const = 0;
  virtual void Schedule(Millis at, std::function<void()> action,
                        EventPriority priority = EventPriority::kNormal) = 0;
};

// Single-threaded discrete-event loop. Events are ordered by
// (time, priority, insertion sequence), which makes every run with the same
// inputs replay identically.
class EventLoop final : public Scheduler {
 public:
  Millis Now() const override { return now_; }

  // Scheduling in the past is a programming error and throws std::logic_error.
  void Schedule(Millis at, std::function<void()> action,
                EventPriority priority = EventPriority::kNormal) override;

  // Runs the earliest pending event. Returns false when nothing is pending.
  bool Step();

  // Runs every event with time <= t, then moves the clock to t.
  void RunUntil(Millis t);

  // Drains the queue.
  void Run();

  bool empty() const { return queue_.empty(); }
  size_t pending() const { return queue_.size(); }
  uint64_t processed() const { return processed_; }
  // Time of the next pending event; only meaningful when !empty().
  Millis next_time() const { return queue_.top().at; }

 private:
  struct Event {
    Millis at;
    EventPriority priority;
    uint64_t seq;
    std::function<void()> action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      if (a.priority != b.priority) return a.priority > b.priority;
      return a.seq > b.seq;
    }
  };

  Millis now_ = 0;
  uint64_t next_seq_ = 0;
  uint64_t processed_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

}  // namespace chaoslab
