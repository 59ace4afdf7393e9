#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "dynostore/container/backend.hpp"
#include "dynostore/container/chunk_store.hpp"
#include "dynostore/container/lru_cache.hpp"
#include "dynostore/domain/clock.hpp"
#include "dynostore/domain/json.hpp"
#include "dynostore/domain/keyed_mutex.hpp"
#include "dynostore/management/auth.hpp"

namespace dynostore::container {

struct ContainerConfig {
  std::string name;
  Uuid id;
  std::filesystem::path storage_path;
  std::uint64_t storage_capacity = 0;
  std::uint64_t memory_budget = 0;
  // Defaults to a quarter of memory_budget.
  std::optional<std::uint64_t> cache_capacity;
  std::string listen_address = "127.0.0.1:0";
  std::string gateway_address;
  std::string registration_token;
  double annual_failure_rate = 0.0;
  bool sync_writes = true;

  std::uint64_t effective_cache_capacity() const { return cache_capacity.value_or(memory_budget / 4); }

  // Reads a config file; an absent "id" is generated once and persisted next
  // to the chunk directory so the container keeps its identity across restarts.
  static ContainerConfig load(const std::filesystem::path& file);
  static ContainerConfig from_json(const Json& j);
};

// A storage endpoint: token-checked chunk operations over a backend with a
// write-through LRU cache and a monitor (status()).
class ContainerNode final : public ChunkStore {
 public:
  ContainerNode(ContainerConfig config, std::unique_ptr<StorageBackend> backend,
                const management::TokenAuthority& authority);

  void put_chunk(const ChunkKey& key, ByteView bytes, const std::string& token) override;
  Bytes get_chunk(const ChunkKey& key, const std::string& token) override;
  void delete_chunk(const ChunkKey& key, const std::string& token) override;
  bool exists_chunk(const ChunkKey& key, const std::string& token) override;
  ContainerState status() override;
  std::vector<ChunkKey> list_chunks(const std::string& token) override;

  const ContainerConfig& config() const { return config_; }
  StorageBackend& backend() { return *backend_; }
  LruCache& cache() { return cache_; }
  std::uint64_t cache_hits() const { return hits_.load(); }
  std::uint64_t cache_misses() const { return misses_.load(); }
  // Cold-start the cache (as after a restart).
  void drop_cache() { cache_.clear(); }

 private:
  ContainerConfig config_;
  std::unique_ptr<StorageBackend> backend_;
  const management::TokenAuthority& authority_;
  LruCache cache_;
  KeyedMutex key_locks_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

// Builds a FileBackend-backed node from a config (storage_path/chunks).
std::unique_ptr<ContainerNode> open_container(const ContainerConfig& config,
                                              const management::TokenAuthority& authority);

}  // namespace dynostore::container
