#pragma once

#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynostore/domain/bytes.hpp"

namespace dynostore::container {

// Byte-bounded LRU map. Values are shared immutable buffers so callers copy
// payloads outside the lock.
class LruCache {
 public:
  using Value = std::shared_ptr<const Bytes>;

  explicit LruCache(std::uint64_t capacity_bytes);

  // Inserts or refreshes `key`, evicting least-recently-used entries to make
  // room. A value larger than the whole cache is not cached (and any older
  // entry for the key is dropped); returns false in that case.
  bool put(const std::string& key, Value value);
  // Marks the entry most recently used on a hit.
  Value get(const std::string& key);
  bool contains(const std::string& key) const;
  void erase(const std::string& key);
  void clear();

  std::uint64_t capacity() const { return capacity_; }
  std::uint64_t size_bytes() const;
  std::size_t entries() const;
  // Most recently used first.
  std::vector<std::string> keys() const;

 private:
  void evict_until_fits(std::uint64_t incoming);

  std::uint64_t capacity_;
  mutable std::mutex mu_;
  std::list<std::pair<std::string, Value>> order_;  // front = MRU
  std::unordered_map<std::string, std::list<std::pair<std::string, Value>>::iterator> index_;
  std::uint64_t bytes_ = 0;
};

}  // namespace dynostore::container
