#pragma once

#include <condition_variable>
#include <mutex>
#include <string>
#include <unordered_map>

namespace dynostore {

// Serialises work on equal keys while letting distinct keys proceed in
// parallel. Entries exist only while some thread holds or waits on the key.
class KeyedMutex {
 public:
  class Guard {
   public:
    Guard(KeyedMutex& owner, std::string key) : owner_(&owner), key_(std::move(key)) { owner_->acquire(key_); }
    ~Guard() {
      if (owner_) owner_->release(key_);
    }
    Guard(Guard&& other) noexcept : owner_(other.owner_), key_(std::move(other.key_)) { other.owner_ = nullptr; }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;
    Guard& operator=(Guard&&) = delete;

   private:
    KeyedMutex* owner_;
    std::string key_;
  };

  Guard lock(std::string key) { return Guard(*this, std::move(key)); }

 private:
  struct Slot {
    bool held = false;
    int waiters = 0;
  };

  void acquire(const std::string& key) {
    std::unique_lock lock(mu_);
    auto& slot = slots_[key];
    ++slot.waiters;
    cv_.wait(lock, [&] { return !slots_[key].held; });
    auto& s = slots_[key];
    --s.waiters;
    s.held = true;
  }

  void release(const std::string& key) {
    std::lock_guard lock(mu_);
    auto it = slots_.find(key);
    it->second.held = false;
    if (it->second.waiters == 0) slots_.erase(it);
    cv_.notify_all();
  }

  std::mutex mu_;
  std::condition_variable cv_;
  std::unordered_map<std::string, Slot> slots_;
};

}  // namespace dynostore
