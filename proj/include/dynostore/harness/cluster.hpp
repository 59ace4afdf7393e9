#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dynostore/container/node.hpp"
#include "dynostore/domain/clock.hpp"
#include "dynostore/harness/faults.hpp"
#include "dynostore/management/auth.hpp"
#include "dynostore/management/gateway.hpp"
#include "dynostore/management/health.hpp"
#include "dynostore/management/http.hpp"
#include "dynostore/management/registry.hpp"
#include "dynostore/metadata/service.hpp"
#include "dynostore/placement/scenario.hpp"

namespace dynostore::harness {

struct ClusterOptions {
  std::vector<placement::ContainerSpec> containers;
  std::size_t replicas = 3;
  // Chunk files live under this directory; empty selects a fresh temporary
  // directory removed with the cluster. Ignored for memory backends.
  std::filesystem::path root;
  bool file_backed = true;
  std::uint64_t seed = 1;
  placement::UtilizationWeights weights;
};

struct SweepReport {
  std::size_t chunks = 0;
  std::size_t live_versions = 0;
  // Stored chunks referenced by no live version.
  std::vector<std::string> orphans;
  // Chunks referenced by more than one live version.
  std::vector<std::string> shared;
  // Live-version chunks absent from their container.
  std::vector<std::string> missing;

  bool clean() const { return orphans.empty() && shared.empty(); }
};

// Every component of a deployment in one process: containers (real nodes
// behind fault switches), metadata replicas, registry, gateway and a manual
// clock. Same code paths as the standalone services, minus the sockets.
class Cluster {
 public:
  explicit Cluster(ClusterOptions options);
  ~Cluster();
  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  ManualClock& clock() { return clock_; }
  const management::TokenAuthority& authority() const { return *authority_; }
  management::AuthService& auth() { return *auth_service_; }
  management::Registry& registry() { return registry_; }
  management::Gateway& gateway() { return *gateway_; }
  management::HealthChecker& health() { return *health_; }
  metadata::MetadataService& metadata() { return *metadata_; }

  std::size_t size() const { return nodes_.size(); }
  container::ContainerNode& node(std::size_t i) { return *nodes_.at(i); }
  FaultInjectingStore& fault(std::size_t i) { return *faults_.at(i); }
  const Uuid& container_id(std::size_t i) const { return ids_.at(i); }
  std::size_t index_of(const Uuid& id) const;
  KillSwitch& kill_switch() { return *kill_switch_; }

  void kill(std::size_t i) { faults_.at(i)->set_down(true); }
  void revive(std::size_t i) { faults_.at(i)->set_down(false); }
  void revive_all();
  metadata::LocalTransport& replica(std::size_t i) { return *transports_.at(i); }

  // Fresh tokens under the cluster clock.
  std::string admin_token();
  std::string user_token(const UserId& user);
  // Creates the user's namespace and the collection /user/name.
  void create_user(const UserId& user, const std::string& collection);

  // Serves the gateway over loopback HTTP; returns its endpoint.
  std::string serve_gateway(std::chrono::milliseconds injected_latency = std::chrono::milliseconds(0));
  void stop_gateway();

  // Resident chunk bytes across all containers.
  std::uint64_t stored_bytes();
  std::map<Uuid, std::uint64_t> chunk_counts();

  // Cross-checks every stored chunk against the live versions in every
  // namespace.
  SweepReport sweep();

 private:
  ClusterOptions options_;
  ManualClock clock_;
  std::filesystem::path root_;
  bool owns_root_ = false;
  std::unique_ptr<management::TokenAuthority> authority_;
  std::unique_ptr<management::AuthService> auth_service_;
  std::shared_ptr<KillSwitch> kill_switch_;
  std::vector<std::unique_ptr<container::ContainerNode>> nodes_;
  std::vector<std::shared_ptr<FaultInjectingStore>> faults_;
  std::vector<Uuid> ids_;
  std::vector<std::shared_ptr<metadata::LocalTransport>> transports_;
  std::unique_ptr<metadata::MetadataService> metadata_;
  management::Registry registry_;
  std::unique_ptr<management::Gateway> gateway_;
  std::unique_ptr<management::HealthChecker> health_;
  std::unique_ptr<management::GatewayServer> server_;
  std::vector<UserId> users_;
};

}  // namespace dynostore::harness
