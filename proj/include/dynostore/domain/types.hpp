#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynostore/domain/bytes.hpp"
#include "dynostore/domain/path.hpp"
#include "dynostore/domain/uuid.hpp"

namespace dynostore {

using UserId = std::string;

// Ordered: admin > write > read.
enum class Mode : std::uint8_t { Read = 1, Write = 2, Admin = 3 };

std::string_view mode_name(Mode mode) noexcept;
Mode parse_mode(std::string_view text);

struct ChunkLocation {
  std::uint16_t index = 0;
  Uuid container;

  bool operator==(const ChunkLocation&) const = default;
};

// Metadata record for one immutable object version.
struct ObjectDescriptor {
  Uuid object_uuid;
  ObjectPath path = ObjectPath::parse("/_");
  std::uint64_t size_bytes = 0;
  Digest object_hash{};
  std::uint16_t n = 1;
  std::uint16_t k = 1;
  std::vector<ChunkLocation> chunk_locations;
  UserId owner;
  std::int64_t created_at = 0;  // ms since epoch
  std::optional<Uuid> version_of;
  // 1-based position in the version chain, assigned on registration.
  std::uint32_t version = 0;
  // Opaque client-side annotation (e.g. plaintext checksum of an encrypted object).
  std::string client_tag;

  bool operator==(const ObjectDescriptor&) const = default;
};

// Throws Error(InvalidDescriptor) unless: 1 <= k <= n <= 255; exactly n
// locations with indices 0..n-1; distinct containers when n > 1.
void validate_descriptor(const ObjectDescriptor& d);

struct ContainerState {
  Uuid container_id;
  std::string endpoint;
  std::string name;
  std::uint64_t mem_total = 0;
  std::uint64_t mem_available = 0;
  std::uint64_t fs_total = 0;
  std::uint64_t fs_available = 0;
  double annual_failure_rate = 0.0;
  bool healthy = true;
  std::int64_t last_probe = 0;
  std::uint64_t chunk_count = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
};

// Throws Error(InvalidParams) when a capacity or rate invariant is broken.
void validate_state(const ContainerState& s);

// A grant (or, with deny set, an explicit revocation) on a collection or object.
struct Permission {
  UserId subject;
  Mode mode = Mode::Read;
  ObjectPath scope = ObjectPath::parse("/_");
  bool deny = false;
};

// Chunk storage key on a container: object uuid + chunk index, flattened to
// "<uuid>.<index>".
struct ChunkKey {
  Uuid object;
  std::uint16_t index = 0;

  std::string str() const;
  static ChunkKey parse(std::string_view text);
  auto operator<=>(const ChunkKey&) const = default;
};

}  // namespace dynostore
