#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dynostore/domain/json.hpp"
#include "dynostore/domain/types.hpp"

namespace dynostore::metadata {

inline constexpr std::uint32_t kDefaultRetentionDays = 30;

// Total order on proposals: wall-clock milliseconds, then proposer id.
struct Timestamp {
  std::int64_t wall_ms = 0;
  std::uint32_t proposer = 0;

  auto operator<=>(const Timestamp&) const = default;
};

// ---- replicated values, one per key ----

struct CollectionRecord {
  UserId owner;
  bool is_namespace = false;
  // Stable alternate address; paths stay the canonical key.
  Uuid id;

  bool operator==(const CollectionRecord&) const = default;
};

struct VersionEntry {
  ObjectDescriptor descriptor;
  bool expired = false;
  // When a newer version replaced this one; 0 while it is the head.
  std::int64_t superseded_at = 0;

  bool operator==(const VersionEntry&) const = default;
};

// Version chain of one object name, oldest first: versions[i] is version i+1.
struct ObjectRecord {
  std::vector<VersionEntry> versions;
  std::uint32_t retention_days = kDefaultRetentionDays;

  const ObjectDescriptor& head() const { return versions.back().descriptor; }
  bool operator==(const ObjectRecord&) const = default;
};

struct AclEntry {
  Mode mode = Mode::Read;
  bool deny = false;

  bool operator==(const AclEntry&) const = default;
};

struct AclRecord {
  std::map<UserId, AclEntry> entries;

  bool operator==(const AclRecord&) const = default;
};

using Record = std::variant<std::monostate, CollectionRecord, ObjectRecord, AclRecord>;

// ---- updates carried by proposals ----

struct CreateCollection {
  UserId owner;
  bool is_namespace = false;
  Uuid id;
};
struct PutVersion {
  ObjectDescriptor descriptor;  // version and version_of already filled in
};
struct Evict {};
struct Grant {
  Permission permission;
};
struct Purge {
  std::vector<Uuid> versions;
};
struct SetRetention {
  std::uint32_t days = kDefaultRetentionDays;
};

using Update = std::variant<CreateCollection, PutVersion, Evict, Grant, Purge, SetRetention>;

// Deterministic state transition applied identically on every replica.
void apply_update(Record& record, const Update& update);

// Keys of the replicated map. Each collection, object and ACL scope is its
// own consensus instance.
std::string collection_key(const ObjectPath& path);
std::string object_key(const ObjectPath& path);
std::string acl_key(const ObjectPath& path);
inline constexpr std::string_view kObjectPrefix = "o:";
inline constexpr std::string_view kCollectionPrefix = "c:";

void to_json(Json& j, const Timestamp& ts);
void from_json(const Json& j, Timestamp& ts);
void to_json(Json& j, const Update& u);
void from_json(const Json& j, Update& u);
void to_json(Json& j, const Record& r);
void from_json(const Json& j, Record& r);

}  // namespace dynostore::metadata
