#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dynostore/domain/clock.hpp"
#include "dynostore/erasure/codec.hpp"
#include "dynostore/management/auth.hpp"
#include "dynostore/management/registry.hpp"
#include "dynostore/metadata/service.hpp"
#include "dynostore/placement/utilization.hpp"

namespace dynostore::management {

enum class UploadMode { Regular, Resilient };
std::string_view upload_mode_name(UploadMode mode) noexcept;
UploadMode parse_upload_mode(std::string_view text);

struct UploadOptions {
  UploadMode mode = UploadMode::Regular;
  // Explicit code parameters for resilient mode; otherwise the planner picks.
  std::optional<std::uint16_t> n;
  std::optional<std::uint16_t> k;
  std::optional<double> target_loss;
  std::string client_tag;
};

struct DownloadStats {
  std::size_t fetched = 0;
  std::size_t integrity_failures = 0;
  std::size_t fetch_failures = 0;
};

// Orchestrates object transfers between clients, containers and the
// metadata service. Containers are driven with a service token minted from
// the shared authority.
class Gateway {
 public:
  struct Options {
    placement::UtilizationWeights weights;
    double default_target_loss = 0.001;
  };

  Gateway(Registry& registry, metadata::MetadataApi& metadata, const TokenAuthority& authority, const Clock& clock,
          Options options);
  Gateway(Registry& registry, metadata::MetadataApi& metadata, const TokenAuthority& authority, const Clock& clock)
      : Gateway(registry, metadata, authority, clock, Options{}) {}

  // All n chunk writes must succeed before the object is registered; on any
  // failure the chunks already written are deleted (or queued for deletion).
  ObjectDescriptor upload(const ObjectPath& path, ByteView object, const UploadOptions& options,
                          const std::string& token);
  Bytes download(const ObjectPath& path, std::optional<std::uint32_t> version, const std::string& token,
                 DownloadStats* stats = nullptr, ObjectDescriptor* resolved = nullptr);
  ObjectDescriptor describe(const ObjectPath& path, std::optional<std::uint32_t> version, const std::string& token);
  bool exists(const ObjectPath& path, const std::string& token);
  void evict(const ObjectPath& path, const std::string& token);
  // Expires old versions (admin token) and deletes their chunks.
  std::vector<ObjectDescriptor> garbage_collect(const std::string& token);

  Uuid register_container(const ContainerState& state, std::shared_ptr<container::ChunkStore> store,
                          const std::string& token);
  void deregister_container(const Uuid& id, const std::string& token);
  std::vector<ContainerState> containers(const std::string& token) const;

  // Retries queued chunk deletions; returns how many remain queued.
  std::size_t flush_pending_deletes();
  std::size_t pending_deletes() const;

  // Throws Unauthorized unless `token` verifies and carries `scope`.
  AuthToken authorize(const std::string& token, Mode scope) const { return authority_.require(token, scope); }

  metadata::MetadataApi& metadata() { return metadata_; }
  Registry& registry() { return registry_; }
  std::string service_token();

 public:
  struct PendingDelete {
    Uuid container;
    ChunkKey key;
    std::int64_t bytes = 0;
  };

 private:
  // Deletes chunks, queueing the ones that cannot be reached.
  void delete_chunks(const std::vector<PendingDelete>& chunks);
  // Fetches from the front of `queue` with up to k+2 workers until `want`
  // intact chunks arrive; attempted locations are removed from the queue.
  std::vector<erasure::ChunkPackage> fetch(const ObjectDescriptor& d, std::vector<ChunkLocation>& queue,
                                           std::size_t want, DownloadStats& stats);

  Registry& registry_;
  metadata::MetadataApi& metadata_;
  const TokenAuthority& authority_;
  const Clock& clock_;
  Options options_;

  std::mutex token_mu_;
  std::optional<AuthToken> service_token_;

  mutable std::mutex pending_mu_;
  std::vector<PendingDelete> pending_;
};

}  // namespace dynostore::management
