#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dynostore/domain/bytes.hpp"
#include "dynostore/domain/uuid.hpp"
#include "dynostore/erasure/chunk_package.hpp"

namespace dynostore::erasure {

struct ResilienceParams {
  std::uint16_t n = 1;
  std::uint16_t k = 1;

  // 1 <= k <= n <= 255, else Error(InvalidParams).
  void validate() const;
  std::uint16_t tolerance() const { return static_cast<std::uint16_t>(n - k); }
  bool operator==(const ResilienceParams&) const = default;
};

struct SplitResult {
  std::vector<Bytes> payloads;  // n entries, data stripes first
  std::uint32_t pad_len = 0;
};

// Zero-pads `object` to a multiple of k, stripes it into k data payloads and
// appends n-k parity payloads. All payloads have length ceil(|object|/k).
SplitResult split(ByteView object, ResilienceParams params);

// Inverse of split given any k distinct payloads keyed by index.
Bytes merge(std::span<const ChunkPackage> chunks, std::uint16_t k);
Bytes merge(std::span<const ChunkPackage* const> chunks, std::uint16_t k);

struct EncodedChunk {
  ChunkPackage package;
  Uuid target;

  bool operator==(const EncodedChunk&) const = default;
};

// Split, hash, and pack; chunk i goes to targets[i]. Throws
// NotEnoughContainers when targets.size() < n.
std::vector<EncodedChunk> encode(ByteView object, const Uuid& object_uuid, ResilienceParams params,
                                 std::span<const Uuid> targets);

// Merges any k of the chunks and verifies the result against the stored hash.
// Throws NotEnoughChunks, InconsistentHeaders, or HashMismatch.
Bytes decode(std::span<const ChunkPackage> chunks, std::uint16_t k);
Bytes decode(std::span<const ChunkPackage* const> chunks, std::uint16_t k);

// Like decode, but on HashMismatch keeps trying other k-subsets of the
// supplied chunks (up to max_attempts) before giving up.
Bytes decode_any_subset(std::span<const ChunkPackage> chunks, std::uint16_t k, std::size_t max_attempts = 4096);

}  // namespace dynostore::erasure
