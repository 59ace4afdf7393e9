#include "dynostore/harness/cluster.hpp"

#include <random>

#include "dynostore/domain/error.hpp"
#include "dynostore/metadata/transport.hpp"

namespace dynostore::harness {

namespace fs = std::filesystem;

namespace {

fs::path make_temp_root(std::uint64_t seed) {
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto dir = fs::temp_directory_path() /
               ("dynostore-" + std::to_string(seed) + "-" + std::to_string(std::uniform_int_distribution<std::uint64_t>()(rd)));
    if (fs::create_directories(dir)) return dir;
  }
  throw Error(Errc::BackendFailure, "cannot create a temporary cluster directory");
}

}  // namespace

Cluster::Cluster(ClusterOptions options) : options_(std::move(options)) {
  if (options_.containers.empty()) throw Error(Errc::ScenarioInvalid, "cluster needs at least one container");
  if (options_.replicas == 0) throw Error(Errc::ScenarioInvalid, "cluster needs at least one metadata replica");

  std::mt19937_64 rng(options_.seed);
  Bytes secret(32);
  for (auto& b : secret) b = static_cast<std::uint8_t>(rng());
  authority_ = std::make_unique<management::TokenAuthority>(std::move(secret), clock_);
  auth_service_ = std::make_unique<management::AuthService>(*authority_);
  kill_switch_ = std::make_shared<KillSwitch>();

  if (options_.file_backed) {
    root_ = options_.root;
    if (root_.empty()) {
      root_ = make_temp_root(options_.seed);
      owns_root_ = true;
    }
  }

  std::vector<std::shared_ptr<metadata::ReplicaTransport>> replicas;
  for (std::size_t i = 0; i < options_.replicas; ++i) {
    metadata::Replica::Options ro;
    ro.lock_lease = std::chrono::milliseconds(10000);
    auto t = std::make_shared<metadata::LocalTransport>(
        std::make_shared<metadata::Replica>("replica-" + std::to_string(i), ro));
    transports_.push_back(t);
    replicas.push_back(t);
  }
  metadata_ = std::make_unique<metadata::MetadataService>(std::move(replicas), *authority_, clock_);
  management::Gateway::Options go;
  go.weights = options_.weights;
  gateway_ = std::make_unique<management::Gateway>(registry_, *metadata_, *authority_, clock_, go);
  health_ = std::make_unique<management::HealthChecker>(registry_, clock_);

  const auto states = placement::to_states(options_.containers, options_.seed);
  const auto admin = admin_token();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& spec = options_.containers[i];
    container::ContainerConfig cfg;
    cfg.name = spec.name.empty() ? "container-" + std::to_string(i) : spec.name;
    cfg.id = states[i].container_id;
    cfg.storage_capacity = spec.fs_total;
    cfg.memory_budget = spec.mem_total;
    cfg.annual_failure_rate = spec.annual_failure_rate;
    cfg.sync_writes = false;
    std::unique_ptr<container::StorageBackend> backend;
    if (options_.file_backed) {
      cfg.storage_path = root_ / cfg.name;
      backend = std::make_unique<container::FileBackend>(cfg.storage_path / "chunks", cfg.storage_capacity, false);
    } else {
      backend = std::make_unique<container::MemoryBackend>(cfg.storage_capacity);
    }
    auto node = std::make_unique<container::ContainerNode>(cfg, std::move(backend), *authority_);
    // Non-owning alias: the node outlives every store handle held here.
    std::shared_ptr<container::ChunkStore> inner(std::shared_ptr<void>{}, node.get());
    auto fault = std::make_shared<FaultInjectingStore>(inner, kill_switch_);
    auto state = node->status();
    state.mem_available = state.mem_total - std::min(state.mem_total, spec.mem_used);
    gateway_->register_container(state, fault, admin);
    ids_.push_back(cfg.id);
    nodes_.push_back(std::move(node));
    faults_.push_back(std::move(fault));
  }
}

Cluster::~Cluster() {
  stop_gateway();
  health_->stop();
  gateway_.reset();
  nodes_.clear();
  if (owns_root_) {
    std::error_code ec;
    fs::remove_all(root_, ec);
  }
}

std::size_t Cluster::index_of(const Uuid& id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i] == id) return i;
  }
  throw Error(Errc::UnknownContainer, id.to_string());
}

void Cluster::revive_all() {
  for (auto& f : faults_) f->set_down(false);
}

std::string Cluster::admin_token() {
  return authority_->issue("admin", {Mode::Read, Mode::Write, Mode::Admin}, std::chrono::hours(1)).encode();
}

std::string Cluster::user_token(const UserId& user) {
  return authority_->issue(user, {Mode::Read, Mode::Write}, std::chrono::hours(1)).encode();
}

void Cluster::create_user(const UserId& user, const std::string& collection) {
  const auto token = user_token(user);
  metadata_->create_namespace(user, token);
  if (!collection.empty()) metadata_->create_collection(ObjectPath::from_segments({user, collection}), token);
  users_.push_back(user);
}

std::string Cluster::serve_gateway(std::chrono::milliseconds injected_latency) {
  if (!server_) {
    server_ = std::make_unique<management::GatewayServer>(*gateway_, *auth_service_);
    server_->start();
  }
  server_->set_injected_latency(injected_latency);
  return server_->endpoint();
}

void Cluster::stop_gateway() {
  if (server_) server_->stop();
  server_.reset();
}

std::uint64_t Cluster::stored_bytes() {
  std::uint64_t total = 0;
  for (auto& node : nodes_) {
    const auto stats = node->backend().stats();
    total += stats.total - stats.available;
  }
  return total;
}

std::map<Uuid, std::uint64_t> Cluster::chunk_counts() {
  std::map<Uuid, std::uint64_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) out[ids_[i]] = nodes_[i]->backend().stats().chunk_count;
  return out;
}

SweepReport Cluster::sweep() {
  SweepReport report;
  const auto admin = admin_token();
  std::map<std::pair<Uuid, std::string>, int> refs;
  for (const auto& user : users_) {
    for (const auto& d : metadata_->list(ObjectPath::from_segments({user}), admin)) {
      ++report.live_versions;
      for (const auto& loc : d.chunk_locations) ++refs[{loc.container, ChunkKey{d.object_uuid, loc.index}.str()}];
    }
  }
  std::map<std::pair<Uuid, std::string>, bool> seen;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (const auto& key : nodes_[i]->list_chunks(admin)) {
      ++report.chunks;
      const auto id = std::make_pair(ids_[i], key.str());
      seen[id] = true;
      auto it = refs.find(id);
      if (it == refs.end()) {
        report.orphans.push_back(ids_[i].to_string() + "/" + key.str());
      } else if (it->second > 1) {
        report.shared.push_back(ids_[i].to_string() + "/" + key.str());
      }
    }
  }
  for (const auto& [id, count] : refs) {
    if (!seen.contains(id)) report.missing.push_back(id.first.to_string() + "/" + id.second);
  }
  return report;
}

}  // namespace dynostore::harness
