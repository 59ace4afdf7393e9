#include "dynostore/container/node.hpp"

#include <fstream>
#include <sstream>

#include "dynostore/domain/error.hpp"

namespace dynostore::container {

namespace fs = std::filesystem;

ContainerConfig ContainerConfig::from_json(const Json& j) {
  ContainerConfig c;
  c.name = j.at("name").get<std::string>();
  if (j.contains("id")) c.id = j["id"].get<Uuid>();
  c.storage_path = j.at("storage_path").get<std::string>();
  c.storage_capacity = j.at("storage_capacity").get<std::uint64_t>();
  c.memory_budget = j.value("memory_budget", std::uint64_t{256} << 20);
  if (j.contains("cache_capacity")) c.cache_capacity = j["cache_capacity"].get<std::uint64_t>();
  c.listen_address = j.value("listen_address", c.listen_address);
  c.gateway_address = j.value("gateway_address", "");
  c.registration_token = j.value("registration_token", "");
  c.annual_failure_rate = j.value("annual_failure_rate", 0.0);
  c.sync_writes = j.value("sync_writes", true);
  return c;
}

ContainerConfig ContainerConfig::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::InvalidParams, "cannot read container config " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto c = from_json(parse_json(buf.str()));
  if (c.id.is_nil()) {
    fs::create_directories(c.storage_path);
    auto id_file = c.storage_path / "container.id";
    std::ifstream id_in(id_file);
    std::string text;
    if (id_in >> text) {
      c.id = Uuid::parse(text);
    } else {
      c.id = Uuid::random();
      std::ofstream(id_file) << c.id.to_string() << "\n";
    }
  }
  return c;
}

ContainerNode::ContainerNode(ContainerConfig config, std::unique_ptr<StorageBackend> backend,
                             const management::TokenAuthority& authority)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      authority_(authority),
      cache_(config_.effective_cache_capacity()) {
  if (config_.id.is_nil()) config_.id = Uuid::random();
}

void ContainerNode::put_chunk(const ChunkKey& key, ByteView bytes, const std::string& token) {
  authority_.require(token, Mode::Admin);
  const std::string id = key.str();
  auto guard = key_locks_.lock(id);
  backend_->write(id, bytes);
  // Objects larger than the cache go straight to the filesystem only.
  cache_.put(id, std::make_shared<const Bytes>(bytes.begin(), bytes.end()));
}

Bytes ContainerNode::get_chunk(const ChunkKey& key, const std::string& token) {
  authority_.require(token, Mode::Admin);
  const std::string id = key.str();
  auto guard = key_locks_.lock(id);
  if (auto hit = cache_.get(id)) {
    ++hits_;
    return *hit;
  }
  ++misses_;
  auto bytes = backend_->read(id);
  if (!bytes) throw Error(Errc::NotFound, "chunk " + id + " not stored on " + config_.name);
  cache_.put(id, std::make_shared<const Bytes>(*bytes));
  return std::move(*bytes);
}

void ContainerNode::delete_chunk(const ChunkKey& key, const std::string& token) {
  authority_.require(token, Mode::Admin);
  const std::string id = key.str();
  auto guard = key_locks_.lock(id);
  cache_.erase(id);
  backend_->remove(id);
}

bool ContainerNode::exists_chunk(const ChunkKey& key, const std::string& token) {
  authority_.require(token, Mode::Admin);
  return backend_->exists(key.str());
}

ContainerState ContainerNode::status() {
  auto stats = backend_->stats();
  ContainerState s;
  s.container_id = config_.id;
  s.name = config_.name;
  s.endpoint = config_.listen_address;
  s.mem_total = config_.memory_budget;
  const auto cached = cache_.size_bytes();
  s.mem_available = cached > s.mem_total ? 0 : s.mem_total - cached;
  s.fs_total = stats.total;
  s.fs_available = std::min(stats.available, stats.total);
  s.annual_failure_rate = config_.annual_failure_rate;
  s.healthy = true;
  s.last_probe = 0;
  s.chunk_count = stats.chunk_count;
  s.cache_hits = hits_.load();
  s.cache_misses = misses_.load();
  return s;
}

std::vector<ChunkKey> ContainerNode::list_chunks(const std::string& token) {
  authority_.require(token, Mode::Admin);
  std::vector<ChunkKey> out;
  for (const auto& id : backend_->list()) {
    try {
      out.push_back(ChunkKey::parse(id));
    } catch (const Error&) {
      // Not a chunk written through this API; ignore.
    }
  }
  return out;
}

std::unique_ptr<ContainerNode> open_container(const ContainerConfig& config,
                                              const management::TokenAuthority& authority) {
  auto backend = std::make_unique<FileBackend>(config.storage_path / "chunks", config.storage_capacity,
                                               config.sync_writes);
  return std::make_unique<ContainerNode>(config, std::move(backend), authority);
}

}  // namespace dynostore::container
