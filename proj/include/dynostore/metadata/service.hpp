#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dynostore/domain/clock.hpp"
#include "dynostore/management/auth.hpp"
#include "dynostore/metadata/transport.hpp"

namespace dynostore::metadata {

// Operations on the namespace tree. Every call carries the caller's bearer
// token; tokens with the admin scope bypass ACL checks.
class MetadataApi {
 public:
  virtual ~MetadataApi() = default;

  // Both return the new collection's id.
  virtual Uuid create_namespace(const UserId& user, const std::string& token) = 0;
  virtual Uuid create_collection(const ObjectPath& path, const std::string& token) = 0;
  // Path of the collection with this id; needs read on it (CollectionNotFound).
  virtual ObjectPath collection_path(const Uuid& id, const std::string& token) = 0;
  // Appends a version. Fills in path, owner (when empty), version and
  // version_of; returns the registered descriptor.
  virtual ObjectDescriptor register_object(const ObjectPath& path, ObjectDescriptor descriptor,
                                           const std::string& token) = 0;
  // Head version, or the given 1-based version.
  virtual ObjectDescriptor resolve(const ObjectPath& path, std::optional<std::uint32_t> version,
                                   const std::string& token) = 0;
  virtual std::vector<VersionEntry> history(const ObjectPath& path, const std::string& token) = 0;
  virtual void grant(const Permission& permission, const std::string& token) = 0;
  virtual bool check(const ObjectPath& path, const UserId& user, Mode mode, const std::string& token) = 0;
  // Removes the name; returns the versions whose chunks are now garbage.
  virtual std::vector<ObjectDescriptor> evict(const ObjectPath& path, const std::string& token) = 0;
  virtual void set_retention(const ObjectPath& path, std::uint32_t days, const std::string& token) = 0;
  // Expires superseded versions older than their retention window; returns them.
  virtual std::vector<ObjectDescriptor> garbage_collect(std::int64_t now_ms, const std::string& token) = 0;
  // Live (unexpired) versions of every object under `prefix`.
  virtual std::vector<ObjectDescriptor> list(const ObjectPath& prefix, const std::string& token) = 0;
};

// Pure ACL evaluation over a quorum-read snapshot. The namespace owner holds
// every mode; otherwise the nearest entry for the user on the path or an
// ancestor decides, and a deny entry revokes all access in its subtree.
std::vector<std::string> permission_keys(const ObjectPath& path);
bool permits(const std::map<std::string, KeyState>& states, const ObjectPath& path, const UserId& user, Mode mode);

// Coordinator: runs majority rounds against the replica set.
class MetadataService final : public MetadataApi {
 public:
  struct Options {
    std::uint32_t proposer_id = 1;
    // How long reads wait for an in-flight proposal to resolve.
    std::chrono::milliseconds lock_wait{2000};
    // Replica lock lease; a round only commits within half of it.
    std::chrono::milliseconds lease{10000};
    int max_attempts = 200;
  };

  MetadataService(std::vector<std::shared_ptr<ReplicaTransport>> replicas, const management::TokenAuthority& auth,
                  const Clock& clock, Options options);
  MetadataService(std::vector<std::shared_ptr<ReplicaTransport>> replicas, const management::TokenAuthority& auth,
                  const Clock& clock)
      : MetadataService(std::move(replicas), auth, clock, Options{}) {}

  Uuid create_namespace(const UserId& user, const std::string& token) override;
  Uuid create_collection(const ObjectPath& path, const std::string& token) override;
  ObjectPath collection_path(const Uuid& id, const std::string& token) override;
  ObjectDescriptor register_object(const ObjectPath& path, ObjectDescriptor descriptor,
                                   const std::string& token) override;
  ObjectDescriptor resolve(const ObjectPath& path, std::optional<std::uint32_t> version,
                           const std::string& token) override;
  std::vector<VersionEntry> history(const ObjectPath& path, const std::string& token) override;
  void grant(const Permission& permission, const std::string& token) override;
  bool check(const ObjectPath& path, const UserId& user, Mode mode, const std::string& token) override;
  std::vector<ObjectDescriptor> evict(const ObjectPath& path, const std::string& token) override;
  void set_retention(const ObjectPath& path, std::uint32_t days, const std::string& token) override;
  std::vector<ObjectDescriptor> garbage_collect(std::int64_t now_ms, const std::string& token) override;
  std::vector<ObjectDescriptor> list(const ObjectPath& prefix, const std::string& token) override;

  // Merged view of a majority (or of every reachable replica when no
  // majority answers): per key, the state with the highest commit timestamp.
  std::map<std::string, KeyState> quorum_read(const std::vector<std::string>& keys);

  std::size_t replica_count() const { return replicas_.size(); }

 private:
  enum class RoundOutcome { Committed, BaseMismatch, Locked, StaleTimestamp, Unreachable };

  using MakeUpdate = std::function<std::optional<Update>(const KeyState& current)>;
  // Read-modify-write of one key until a round commits. Returns the state the
  // committed update was based on, or nullopt when `make` declined.
  std::optional<KeyState> write_key(const std::string& key, const MakeUpdate& make,
                                    std::optional<Uuid> update_id = std::nullopt);
  RoundOutcome run_round(const Proposal& p);
  void repair(std::size_t behind, const std::string& key, const std::vector<std::size_t>& sources);
  Timestamp next_timestamp();
  void observe(const Timestamp& ts);

  std::map<std::string, KeyState> read_once(const std::vector<std::string>& keys, bool& any_pending);
  std::map<std::string, KeyState> scan_all(const std::string& prefix);
  template <class Fn>
  void fan_out(Fn&& fn);

  management::AuthToken authorize(const std::string& token, const ObjectPath& path, Mode mode,
                                   const std::vector<std::string>& extra_keys,
                                   std::map<std::string, KeyState>& states);

  std::vector<std::shared_ptr<ReplicaTransport>> replicas_;
  const management::TokenAuthority& auth_;
  const Clock& clock_;
  Options options_;
  std::mutex ts_mu_;
  std::int64_t last_wall_ = 0;
};

}  // namespace dynostore::metadata
