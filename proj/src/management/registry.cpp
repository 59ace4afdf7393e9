#include "dynostore/management/registry.hpp"

#include <algorithm>
#include <mutex>

#include "dynostore/domain/error.hpp"

namespace dynostore::management {

namespace {

std::uint64_t shifted(std::uint64_t value, std::int64_t delta, std::uint64_t cap) {
  if (delta >= 0) return value > static_cast<std::uint64_t>(delta) ? value - delta : 0;
  return std::min(cap, value + static_cast<std::uint64_t>(-delta));
}

}  // namespace

void Registry::add(ContainerState state, std::shared_ptr<container::ChunkStore> store, std::int64_t now_ms) {
  validate_state(state);
  std::unique_lock lock(mu_);
  retired_.erase(state.container_id);
  state.healthy = true;
  state.last_probe = now_ms;
  const auto id = state.container_id;
  active_[id] = Entry{std::move(state), std::move(store), now_ms, 0};
}

void Registry::remove(const Uuid& id) {
  std::unique_lock lock(mu_);
  auto it = active_.find(id);
  if (it == active_.end()) throw Error(Errc::UnknownContainer, id.to_string());
  retired_[id] = it->second.store;
  active_.erase(it);
}

bool Registry::contains(const Uuid& id) const {
  std::shared_lock lock(mu_);
  return active_.contains(id);
}

std::vector<ContainerState> Registry::snapshot() const {
  std::shared_lock lock(mu_);
  std::vector<ContainerState> out;
  for (const auto& [id, e] : active_) out.push_back(e.state);
  return out;
}

std::vector<ContainerState> Registry::placeable() const {
  std::shared_lock lock(mu_);
  std::vector<ContainerState> out;
  for (const auto& [id, e] : active_) {
    if (e.state.healthy) out.push_back(e.state);
  }
  return out;
}

std::optional<ContainerState> Registry::state(const Uuid& id) const {
  std::shared_lock lock(mu_);
  auto it = active_.find(id);
  if (it == active_.end()) return std::nullopt;
  return it->second.state;
}

std::shared_ptr<container::ChunkStore> Registry::store(const Uuid& id) const {
  std::shared_lock lock(mu_);
  if (auto it = active_.find(id); it != active_.end()) return it->second.store;
  if (auto it = retired_.find(id); it != retired_.end()) return it->second;
  throw Error(Errc::UnknownContainer, id.to_string());
}

bool Registry::healthy(const Uuid& id) const {
  std::shared_lock lock(mu_);
  auto it = active_.find(id);
  return it != active_.end() && it->second.state.healthy;
}

std::vector<std::pair<Uuid, std::shared_ptr<container::ChunkStore>>> Registry::stores() const {
  std::shared_lock lock(mu_);
  std::vector<std::pair<Uuid, std::shared_ptr<container::ChunkStore>>> out;
  for (const auto& [id, e] : active_) out.emplace_back(id, e.store);
  for (const auto& [id, s] : retired_) out.emplace_back(id, s);
  return out;
}

bool Registry::record_probe(const Uuid& id, const ContainerState& fresh, std::int64_t now_ms) {
  std::unique_lock lock(mu_);
  auto it = active_.find(id);
  if (it == active_.end()) return false;
  auto& e = it->second;
  const bool flipped = !e.state.healthy;
  const auto endpoint = e.state.endpoint;
  e.state = fresh;
  e.state.container_id = id;
  if (e.state.endpoint.empty() || e.state.endpoint.ends_with(":0")) e.state.endpoint = endpoint;
  e.state.healthy = true;
  e.state.last_probe = now_ms;
  e.consecutive_failures = 0;
  return flipped;
}

bool Registry::record_failure(const Uuid& id, int threshold, std::int64_t now_ms) {
  std::unique_lock lock(mu_);
  auto it = active_.find(id);
  if (it == active_.end()) return false;
  auto& e = it->second;
  e.state.last_probe = now_ms;
  if (++e.consecutive_failures < threshold || !e.state.healthy) return false;
  e.state.healthy = false;
  return true;
}

void Registry::charge(const Uuid& id, std::int64_t fs_bytes, std::int64_t mem_bytes) {
  std::unique_lock lock(mu_);
  auto it = active_.find(id);
  if (it == active_.end()) return;
  auto& s = it->second.state;
  s.fs_available = shifted(s.fs_available, fs_bytes, s.fs_total);
  s.mem_available = shifted(s.mem_available, mem_bytes, s.mem_total);
}

}  // namespace dynostore::management
