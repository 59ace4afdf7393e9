#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "dynostore/container/chunk_store.hpp"

namespace dynostore::net {
class HttpServer;
class ClientPool;
}  // namespace dynostore::net

namespace dynostore::container {

// Wire API of a data container:
//   PUT /chunks/{id}      body = ChunkPackage bytes
//   GET /chunks/{id}      -> bytes
//   DELETE /chunks/{id}
//   HEAD /chunks/{id}     200 if present, 404 if not
//   GET /chunks           -> JSON list of chunk ids
//   GET /status           -> JSON ContainerState
// Chunk ids are "<uuid>.<index>". Bearer token on every data route.
class ContainerServer {
 public:
  ContainerServer(ChunkStore& store, std::string host = "127.0.0.1", int port = 0);
  ~ContainerServer();

  void start();
  void stop();
  std::string endpoint() const;

 private:
  ChunkStore& store_;
  std::unique_ptr<net::HttpServer> server_;
};

class HttpChunkStore final : public ChunkStore {
 public:
  explicit HttpChunkStore(std::string endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~HttpChunkStore() override;

  void put_chunk(const ChunkKey& key, ByteView bytes, const std::string& token) override;
  Bytes get_chunk(const ChunkKey& key, const std::string& token) override;
  void delete_chunk(const ChunkKey& key, const std::string& token) override;
  bool exists_chunk(const ChunkKey& key, const std::string& token) override;
  ContainerState status() override;
  std::vector<ChunkKey> list_chunks(const std::string& token) override;

 private:
  std::unique_ptr<net::ClientPool> pool_;
};

}  // namespace dynostore::container
