#include "dynostore/container/lru_cache.hpp"

namespace dynostore::container {

LruCache::LruCache(std::uint64_t capacity_bytes) : capacity_(capacity_bytes) {}

void LruCache::evict_until_fits(std::uint64_t incoming) {
  while (!order_.empty() && bytes_ + incoming > capacity_) {
    auto& victim = order_.back();
    bytes_ -= victim.second->size();
    index_.erase(victim.first);
    order_.pop_back();
  }
}

bool LruCache::put(const std::string& key, Value value) {
  std::lock_guard lock(mu_);
  if (auto it = index_.find(key); it != index_.end()) {
    bytes_ -= it->second->second->size();
    order_.erase(it->second);
    index_.erase(it);
  }
  if (value->size() > capacity_) return false;
  evict_until_fits(value->size());
  bytes_ += value->size();
  order_.emplace_front(key, std::move(value));
  index_[key] = order_.begin();
  return true;
}

LruCache::Value LruCache::get(const std::string& key) {
  std::lock_guard lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) return nullptr;
  order_.splice(order_.begin(), order_, it->second);
  return it->second->second;
}

bool LruCache::contains(const std::string& key) const {
  std::lock_guard lock(mu_);
  return index_.count(key) != 0;
}

void LruCache::erase(const std::string& key) {
  std::lock_guard lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) return;
  bytes_ -= it->second->second->size();
  order_.erase(it->second);
  index_.erase(it);
}

void LruCache::clear() {
  std::lock_guard lock(mu_);
  order_.clear();
  index_.clear();
  bytes_ = 0;
}

std::uint64_t LruCache::size_bytes() const {
  std::lock_guard lock(mu_);
  return bytes_;
}

std::size_t LruCache::entries() const {
  std::lock_guard lock(mu_);
  return index_.size();
}

std::vector<std::string> LruCache::keys() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  out.reserve(order_.size());
  for (const auto& [k, v] : order_) out.push_back(k);
  return out;
}

}  // namespace dynostore::container
