#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dynostore/container/chunk_store.hpp"
#include "dynostore/domain/types.hpp"

namespace dynostore::management {

// Active data containers. Deregistered entries leave placement immediately
// but keep their last-known store so evictions and GC still reach chunks
// written there.
class Registry {
 public:
  struct Entry {
    ContainerState state;
    std::shared_ptr<container::ChunkStore> store;
    std::int64_t registered_at = 0;
    int consecutive_failures = 0;
  };

  // Re-registering a known id replaces its endpoint and store.
  void add(ContainerState state, std::shared_ptr<container::ChunkStore> store, std::int64_t now_ms);
  // Throws UnknownContainer.
  void remove(const Uuid& id);
  bool contains(const Uuid& id) const;

  std::vector<ContainerState> snapshot() const;
  // Healthy entries only, in id order; the input to placement.
  std::vector<ContainerState> placeable() const;
  std::optional<ContainerState> state(const Uuid& id) const;
  // Active or retired store. Throws UnknownContainer.
  std::shared_ptr<container::ChunkStore> store(const Uuid& id) const;
  bool healthy(const Uuid& id) const;
  std::vector<std::pair<Uuid, std::shared_ptr<container::ChunkStore>>> stores() const;

  // Health checker hooks. Returns true when the health flag flipped.
  bool record_probe(const Uuid& id, const ContainerState& fresh, std::int64_t now_ms);
  bool record_failure(const Uuid& id, int threshold, std::int64_t now_ms);

  // Adjusts cached availability between probes so a burst of placements
  // sees its own effect. Negative deltas release space.
  void charge(const Uuid& id, std::int64_t fs_bytes, std::int64_t mem_bytes);

 private:
  mutable std::shared_mutex mu_;
  std::map<Uuid, Entry> active_;
  std::map<Uuid, std::shared_ptr<container::ChunkStore>> retired_;
};

}  // namespace dynostore::management
