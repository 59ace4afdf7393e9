#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "dynostore/domain/clock.hpp"
#include "dynostore/management/registry.hpp"

namespace dynostore::management {

// Probes every registered container's status. A container turns unhealthy
// after `failure_threshold` consecutive failed probes and healthy again on
// the first success.
class HealthChecker {
 public:
  struct Options {
    std::chrono::milliseconds interval{10000};
    int failure_threshold = 3;
  };

  HealthChecker(Registry& registry, const Clock& clock, Options options);
  HealthChecker(Registry& registry, const Clock& clock) : HealthChecker(registry, clock, Options{}) {}
  ~HealthChecker();
  HealthChecker(const HealthChecker&) = delete;
  HealthChecker& operator=(const HealthChecker&) = delete;

  // Returns the containers whose health flag flipped.
  std::vector<Uuid> probe_once();

  // Extra work run after every probe round on the loop thread.
  void on_tick(std::function<void()> hook);

  void start();
  void stop();

 private:
  Registry& registry_;
  const Clock& clock_;
  Options options_;
  std::vector<std::function<void()>> hooks_;
  std::thread thread_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
};

}  // namespace dynostore::management
