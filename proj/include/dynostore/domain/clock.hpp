#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace dynostore {

inline constexpr std::int64_t kMillisPerDay = 86'400'000;

class Clock {
 public:
  virtual ~Clock() = default;
  // Milliseconds since the Unix epoch.
  virtual std::int64_t now_ms() const = 0;
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() const override {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }
};

// Test/harness clock that only moves when told to.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::int64_t start_ms = 1'700'000'000'000) : now_(start_ms) {}

  std::int64_t now_ms() const override { return now_.load(); }
  void advance_ms(std::int64_t delta) { now_ += delta; }
  void advance_days(std::int64_t days) { now_ += days * kMillisPerDay; }
  void set_ms(std::int64_t value) { now_ = value; }

 private:
  std::atomic<std::int64_t> now_;
};

}  // namespace dynostore
