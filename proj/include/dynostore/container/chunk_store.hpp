#pragma once

#include <string>
#include <vector>

#include "dynostore/domain/bytes.hpp"
#include "dynostore/domain/types.hpp"

namespace dynostore::container {

// Data-container API as seen by the management plane. Implemented in-process
// by ContainerNode and over the wire by HttpChunkStore.
class ChunkStore {
 public:
  virtual ~ChunkStore() = default;

  // Acks only after the backend write succeeded.
  virtual void put_chunk(const ChunkKey& key, ByteView bytes, const std::string& token) = 0;
  // Throws NotFound for unknown chunks.
  virtual Bytes get_chunk(const ChunkKey& key, const std::string& token) = 0;
  // Idempotent.
  virtual void delete_chunk(const ChunkKey& key, const std::string& token) = 0;
  virtual bool exists_chunk(const ChunkKey& key, const std::string& token) = 0;
  virtual ContainerState status() = 0;
  virtual std::vector<ChunkKey> list_chunks(const std::string& token) = 0;
};

}  // namespace dynostore::container
