#pragma once

#include <cstddef>
#include <cstdint>

#include "dynostore/domain/bytes.hpp"
#include "dynostore/domain/uuid.hpp"

namespace dynostore::erasure {

inline constexpr std::array<std::uint8_t, 4> kChunkMagic = {'D', 'Y', 'N', '1'};
// magic(4) | uuid(16) | index(2) | n(2) | k(2) | pad_len(4) | hash(32) | payload_len(8)
inline constexpr std::size_t kChunkHeaderSize = 70;

// Self-describing unit stored on a container. Integers are little-endian on
// the wire; object_hash is the digest of the original, unpadded object.
struct ChunkPackage {
  Uuid object_uuid;
  std::uint16_t chunk_index = 0;
  std::uint16_t n = 1;
  std::uint16_t k = 1;
  std::uint32_t pad_len = 0;
  Digest object_hash{};
  Bytes payload;

  bool operator==(const ChunkPackage&) const = default;
};

Bytes pack(const ChunkPackage& package);
// Throws BadMagic, Truncated, or InconsistentHeaders (index >= n, k > n,
// trailing bytes).
ChunkPackage unpack(ByteView bytes);

}  // namespace dynostore::erasure
