#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dynostore/domain/bytes.hpp"

namespace dynostore::container {

struct BackendStats {
  std::uint64_t total = 0;
  std::uint64_t available = 0;
  std::uint64_t chunk_count = 0;
};

// Seam between a data container and whatever storage system it fronts.
// Implementations must be safe for concurrent calls on distinct ids.
class StorageBackend {
 public:
  virtual ~StorageBackend() = default;

  // Replaces any previous value. Throws OutOfSpace or BackendFailure.
  virtual void write(const std::string& chunk_id, ByteView bytes) = 0;
  virtual std::optional<Bytes> read(const std::string& chunk_id) const = 0;
  // Returns false if the id was absent.
  virtual bool remove(const std::string& chunk_id) = 0;
  virtual bool exists(const std::string& chunk_id) const = 0;
  virtual BackendStats stats() const = 0;
  virtual std::vector<std::string> list() const = 0;
};

// One file per chunk under a directory, with a byte quota. The index is
// rebuilt from the directory on construction, so acked chunks survive a
// restart.
class FileBackend final : public StorageBackend {
 public:
  FileBackend(std::filesystem::path dir, std::uint64_t capacity_bytes, bool sync_writes = true);

  void write(const std::string& chunk_id, ByteView bytes) override;
  std::optional<Bytes> read(const std::string& chunk_id) const override;
  bool remove(const std::string& chunk_id) override;
  bool exists(const std::string& chunk_id) const override;
  BackendStats stats() const override;
  std::vector<std::string> list() const override;

  const std::filesystem::path& directory() const { return dir_; }
  std::filesystem::path file_for(const std::string& chunk_id) const;

 private:
  std::filesystem::path dir_;
  std::uint64_t capacity_;
  bool sync_;
  mutable std::mutex mu_;
  std::map<std::string, std::uint64_t> sizes_;
  std::atomic<std::uint64_t> used_{0};
  std::atomic<std::uint64_t> count_{0};
};

class MemoryBackend final : public StorageBackend {
 public:
  explicit MemoryBackend(std::uint64_t capacity_bytes);

  void write(const std::string& chunk_id, ByteView bytes) override;
  std::optional<Bytes> read(const std::string& chunk_id) const override;
  bool remove(const std::string& chunk_id) override;
  bool exists(const std::string& chunk_id) const override;
  BackendStats stats() const override;
  std::vector<std::string> list() const override;

 private:
  std::uint64_t capacity_;
  mutable std::mutex mu_;
  std::map<std::string, Bytes> chunks_;
  std::uint64_t used_ = 0;
};

}  // namespace dynostore::container
