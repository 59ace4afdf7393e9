#include "dynostore/harness/faults.hpp"

#include <thread>

#include "dynostore/domain/error.hpp"

namespace dynostore::harness {

void KillSwitch::arm(int writes_until_kill, bool persist) {
  persist_ = persist;
  fired_ = false;
  remaining_ = writes_until_kill;
}

void KillSwitch::disarm() { remaining_ = -1; }

bool KillSwitch::on_write() {
  int current = remaining_.load();
  while (current > 0) {
    if (remaining_.compare_exchange_weak(current, current - 1)) {
      if (current == 1) {
        fired_ = true;
        return true;
      }
      return false;
    }
  }
  return false;
}

FaultInjectingStore::FaultInjectingStore(std::shared_ptr<container::ChunkStore> inner,
                                         std::shared_ptr<KillSwitch> kill_switch)
    : inner_(std::move(inner)), kill_switch_(std::move(kill_switch)) {}

void FaultInjectingStore::gate() const {
  if (const auto latency = latency_.load(); latency.count() > 0) std::this_thread::sleep_for(latency);
  if (down_) throw Error(Errc::Unavailable, "container is down");
}

void FaultInjectingStore::put_chunk(const ChunkKey& key, ByteView bytes, const std::string& token) {
  gate();
  if (kill_switch_ && kill_switch_->on_write()) {
    if (kill_switch_->persist()) inner_->put_chunk(key, bytes, token);
    down_ = true;
    throw Error(Errc::Unavailable, "container died during write");
  }
  inner_->put_chunk(key, bytes, token);
}

Bytes FaultInjectingStore::get_chunk(const ChunkKey& key, const std::string& token) {
  gate();
  return inner_->get_chunk(key, token);
}

void FaultInjectingStore::delete_chunk(const ChunkKey& key, const std::string& token) {
  gate();
  inner_->delete_chunk(key, token);
}

bool FaultInjectingStore::exists_chunk(const ChunkKey& key, const std::string& token) {
  gate();
  return inner_->exists_chunk(key, token);
}

ContainerState FaultInjectingStore::status() {
  gate();
  return inner_->status();
}

std::vector<ChunkKey> FaultInjectingStore::list_chunks(const std::string& token) {
  gate();
  return inner_->list_chunks(token);
}

void corrupt_chunk(container::ContainerNode& node, const ChunkKey& key, std::size_t offset, std::uint8_t mask) {
  const auto id = key.str();
  auto bytes = node.backend().read(id);
  if (!bytes) throw Error(Errc::NotFound, "no chunk " + id);
  if (offset >= bytes->size()) throw Error(Errc::InvalidParams, "offset beyond chunk end");
  (*bytes)[offset] ^= mask;
  node.backend().write(id, *bytes);
  node.cache().erase(id);
}

}  // namespace dynostore::harness
