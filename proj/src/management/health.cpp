#include "dynostore/management/health.hpp"

#include <iostream>

#include "dynostore/domain/error.hpp"

namespace dynostore::management {

HealthChecker::HealthChecker(Registry& registry, const Clock& clock, Options options)
    : registry_(registry), clock_(clock), options_(options) {}

HealthChecker::~HealthChecker() { stop(); }

std::vector<Uuid> HealthChecker::probe_once() {
  std::vector<Uuid> flipped;
  for (const auto& state : registry_.snapshot()) {
    const auto id = state.container_id;
    bool changed = false;
    try {
      auto fresh = registry_.store(id)->status();
      changed = registry_.record_probe(id, fresh, clock_.now_ms());
    } catch (const std::exception&) {
      changed = registry_.record_failure(id, options_.failure_threshold, clock_.now_ms());
    }
    if (changed) flipped.push_back(id);
  }
  return flipped;
}

void HealthChecker::on_tick(std::function<void()> hook) { hooks_.push_back(std::move(hook)); }

void HealthChecker::start() {
  if (thread_.joinable()) return;
  stopping_ = false;
  thread_ = std::thread([this] {
    std::unique_lock lock(mu_);
    while (!cv_.wait_for(lock, options_.interval, [this] { return stopping_; })) {
      lock.unlock();
      for (const auto& id : probe_once()) {
        std::clog << "health: container " << id.to_string() << (registry_.healthy(id) ? " recovered" : " unhealthy")
                  << '\n';
      }
      for (const auto& hook : hooks_) {
        try {
          hook();
        } catch (const std::exception& e) {
          std::clog << "health: tick hook failed: " << e.what() << '\n';
        }
      }
      lock.lock();
    }
  });
}

void HealthChecker::stop() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

}  // namespace dynostore::management
