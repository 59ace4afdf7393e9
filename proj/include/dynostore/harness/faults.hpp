#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>

#include "dynostore/container/chunk_store.hpp"
#include "dynostore/container/node.hpp"

namespace dynostore::harness {

// Shared trigger that takes down whichever container receives the Nth chunk
// write after arming. With `persist` set, the fatal write reaches disk before
// the container dies (crash after write, before ack).
class KillSwitch {
 public:
  void arm(int writes_until_kill, bool persist);
  void disarm();
  // True when this write is the fatal one.
  bool on_write();
  bool persist() const { return persist_; }
  bool fired() const { return fired_; }

 private:
  std::atomic<int> remaining_{-1};
  std::atomic<bool> persist_{false};
  std::atomic<bool> fired_{false};
};

// ChunkStore wrapper with an availability switch: while down every call
// fails with Unavailable, as if the container process were gone.
class FaultInjectingStore final : public container::ChunkStore {
 public:
  FaultInjectingStore(std::shared_ptr<container::ChunkStore> inner, std::shared_ptr<KillSwitch> kill_switch = {});

  void set_down(bool down) { down_ = down; }
  bool down() const { return down_; }
  void set_latency(std::chrono::milliseconds latency) { latency_ = latency; }

  void put_chunk(const ChunkKey& key, ByteView bytes, const std::string& token) override;
  Bytes get_chunk(const ChunkKey& key, const std::string& token) override;
  void delete_chunk(const ChunkKey& key, const std::string& token) override;
  bool exists_chunk(const ChunkKey& key, const std::string& token) override;
  ContainerState status() override;
  std::vector<ChunkKey> list_chunks(const std::string& token) override;

 private:
  void gate() const;

  std::shared_ptr<container::ChunkStore> inner_;
  std::shared_ptr<KillSwitch> kill_switch_;
  std::atomic<bool> down_{false};
  std::atomic<std::chrono::milliseconds> latency_{std::chrono::milliseconds(0)};
};

// Flips bits of one stored chunk byte directly on the backend and evicts the
// cached copy so the next read sees the damage.
void corrupt_chunk(container::ContainerNode& node, const ChunkKey& key, std::size_t offset, std::uint8_t mask = 0xFF);

}  // namespace dynostore::harness
