#include "dynostore/erasure/chunk_package.hpp"

#include <algorithm>
#include <string>

#include "dynostore/domain/error.hpp"

namespace dynostore::erasure {

namespace {

template <typename T>
void put_le(Bytes& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T>
T get_le(ByteView in, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(in[offset + i]) << (8 * i);
  return value;
}

}  // namespace

Bytes pack(const ChunkPackage& package) {
  Bytes out;
  out.reserve(kChunkHeaderSize + package.payload.size());
  out.insert(out.end(), kChunkMagic.begin(), kChunkMagic.end());
  out.insert(out.end(), package.object_uuid.bytes().begin(), package.object_uuid.bytes().end());
  put_le<std::uint16_t>(out, package.chunk_index);
  put_le<std::uint16_t>(out, package.n);
  put_le<std::uint16_t>(out, package.k);
  put_le<std::uint32_t>(out, package.pad_len);
  out.insert(out.end(), package.object_hash.begin(), package.object_hash.end());
  put_le<std::uint64_t>(out, package.payload.size());
  out.insert(out.end(), package.payload.begin(), package.payload.end());
  return out;
}

ChunkPackage unpack(ByteView bytes) {
  if (bytes.size() >= kChunkMagic.size() && !std::equal(kChunkMagic.begin(), kChunkMagic.end(), bytes.begin())) {
    throw Error(Errc::BadMagic, "chunk does not start with DYN1");
  }
  if (bytes.size() < kChunkHeaderSize) {
    throw Error(Errc::Truncated, "chunk header needs 70 bytes, got " + std::to_string(bytes.size()));
  }
  ChunkPackage p;
  p.object_uuid = Uuid::from_bytes(bytes.subspan<4, 16>());
  p.chunk_index = get_le<std::uint16_t>(bytes, 20);
  p.n = get_le<std::uint16_t>(bytes, 22);
  p.k = get_le<std::uint16_t>(bytes, 24);
  p.pad_len = get_le<std::uint32_t>(bytes, 26);
  std::copy_n(bytes.begin() + 30, 32, p.object_hash.begin());
  auto payload_len = get_le<std::uint64_t>(bytes, 62);
  std::uint64_t available = bytes.size() - kChunkHeaderSize;
  if (payload_len > available) {
    throw Error(Errc::Truncated, "payload_len " + std::to_string(payload_len) + " exceeds " + std::to_string(available));
  }
  if (payload_len < available) throw Error(Errc::InconsistentHeaders, "trailing bytes after payload");
  if (p.k < 1 || p.k > p.n || p.chunk_index >= p.n) {
    throw Error(Errc::InconsistentHeaders, "header violates index < n and 1 <= k <= n");
  }
  p.payload.assign(bytes.begin() + kChunkHeaderSize, bytes.end());
  return p;
}

}  // namespace dynostore::erasure
