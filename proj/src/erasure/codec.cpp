#include "dynostore/erasure/codec.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "dynostore/domain/error.hpp"
#include "dynostore/erasure/digest.hpp"
#include "dynostore/erasure/reed_solomon.hpp"

namespace dynostore::erasure {

void ResilienceParams::validate() const {
  if (k < 1 || k > n || n > 255) {
    throw Error(Errc::InvalidParams, "require 1 <= k <= n <= 255, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  }
}

SplitResult split(ByteView object, ResilienceParams params) {
  params.validate();
  const std::size_t stripe = (object.size() + params.k - 1) / params.k;
  SplitResult result;
  result.pad_len = static_cast<std::uint32_t>(stripe * params.k - object.size());
  result.payloads.reserve(params.n);
  for (std::size_t j = 0; j < params.k; ++j) {
    Bytes p(stripe, 0);
    const std::size_t begin = j * stripe;
    if (begin < object.size()) {
      const std::size_t len = std::min(stripe, object.size() - begin);
      std::copy_n(object.begin() + begin, len, p.begin());
    }
    result.payloads.push_back(std::move(p));
  }
  if (params.n > params.k) {
    ReedSolomon rs(params.n, params.k);
    std::vector<ByteView> data(result.payloads.begin(), result.payloads.end());
    for (auto& parity : rs.encode_parity(data)) result.payloads.push_back(std::move(parity));
  }
  return result;
}

namespace {

void check_consistent(std::span<const ChunkPackage* const> chunks, std::uint16_t k) {
  const auto& first = *chunks.front();
  for (const auto* c : chunks) {
    if (c->object_uuid != first.object_uuid || c->n != first.n || c->k != first.k || c->pad_len != first.pad_len ||
        c->object_hash != first.object_hash || c->payload.size() != first.payload.size()) {
      throw Error(Errc::InconsistentHeaders, "chunks disagree on object header fields");
    }
  }
  if (first.k != k) throw Error(Errc::InconsistentHeaders, "chunk k does not match requested k");
}

std::vector<const ChunkPackage*> refs(std::span<const ChunkPackage> chunks) {
  std::vector<const ChunkPackage*> out;
  out.reserve(chunks.size());
  for (const auto& c : chunks) out.push_back(&c);
  return out;
}

}  // namespace

Bytes merge(std::span<const ChunkPackage> chunks, std::uint16_t k) { return merge(refs(chunks), k); }

Bytes merge(std::span<const ChunkPackage* const> chunks, std::uint16_t k) {
  if (chunks.empty()) throw Error(Errc::NotEnoughChunks, "Not enough chunks.");
  check_consistent(chunks, k);
  std::map<unsigned, ByteView> shards;
  for (const auto* c : chunks) shards.emplace(c->chunk_index, c->payload);
  if (shards.size() < k) {
    throw Error(Errc::NotEnoughChunks,
                "Not enough chunks. have " + std::to_string(shards.size()) + ", need " + std::to_string(k));
  }
  const auto& first = *chunks.front();
  const std::size_t stripe = first.payload.size();
  const std::size_t total = stripe * k;
  if (first.pad_len > total) throw Error(Errc::InconsistentHeaders, "pad_len exceeds padded size");
  // Data shards are reconstructed in place; the padding is cut afterwards.
  Bytes out(total);
  std::vector<std::span<std::uint8_t>> stripes;
  stripes.reserve(k);
  for (std::size_t d = 0; d < k; ++d) stripes.emplace_back(out.data() + d * stripe, stripe);
  ReedSolomon(first.n, first.k).reconstruct_into(shards, stripes);
  out.resize(total - first.pad_len);
  return out;
}

std::vector<EncodedChunk> encode(ByteView object, const Uuid& object_uuid, ResilienceParams params,
                                 std::span<const Uuid> targets) {
  params.validate();
  if (targets.size() < params.n) throw Error(Errc::NotEnoughContainers, "Not enough containers available.");
  auto parts = split(object, params);
  const Digest hash = hash_object(object);
  std::vector<EncodedChunk> out;
  out.reserve(params.n);
  for (std::uint16_t i = 0; i < params.n; ++i) {
    ChunkPackage p;
    p.object_uuid = object_uuid;
    p.chunk_index = i;
    p.n = params.n;
    p.k = params.k;
    p.pad_len = parts.pad_len;
    p.object_hash = hash;
    p.payload = std::move(parts.payloads[i]);
    out.push_back({std::move(p), targets[i]});
  }
  return out;
}

Bytes decode(std::span<const ChunkPackage> chunks, std::uint16_t k) { return decode(refs(chunks), k); }

Bytes decode(std::span<const ChunkPackage* const> chunks, std::uint16_t k) {
  Bytes object = merge(chunks, k);
  if (hash_object(object) != chunks.front()->object_hash) {
    throw Error(Errc::HashMismatch, "The hashes are different.");
  }
  return object;
}

Bytes decode_any_subset(std::span<const ChunkPackage> chunks, std::uint16_t k, std::size_t max_attempts) {
  // Deduplicate by index, keeping the first copy of each.
  std::vector<const ChunkPackage*> unique;
  std::vector<bool> seen(256, false);
  for (const auto& c : chunks) {
    if (!seen[c.chunk_index]) {
      seen[c.chunk_index] = true;
      unique.push_back(&c);
    }
  }
  if (unique.size() < k) {
    throw Error(Errc::NotEnoughChunks,
                "Not enough chunks. have " + std::to_string(unique.size()) + ", need " + std::to_string(k));
  }
  // Walk k-combinations in lexicographic order.
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  std::size_t attempts = 0;
  std::vector<const ChunkPackage*> subset;
  while (true) {
    subset.clear();
    for (auto i : pick) subset.push_back(unique[i]);
    try {
      return decode(subset, k);
    } catch (const Error& e) {
      if (e.code() != Errc::HashMismatch && e.code() != Errc::InconsistentHeaders) throw;
    }
    if (++attempts >= max_attempts) break;
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == unique.size() - k + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  throw Error(Errc::HashMismatch, "The hashes are different. no k-subset of " + std::to_string(unique.size()) +
                                      " chunks reproduces the object hash");
}

}  // namespace dynostore::erasure
