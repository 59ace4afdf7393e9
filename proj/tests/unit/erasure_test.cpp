#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "dynostore/erasure/chunk_package.hpp"
#include "dynostore/erasure/codec.hpp"
#include "dynostore/erasure/digest.hpp"
#include "dynostore/erasure/gf256.hpp"
#include "dynostore/erasure/reed_solomon.hpp"
#include "test_support.hpp"

namespace dynostore::erasure {
namespace {

using testing::random_payload;

// Shift-and-add multiplication modulo x^8 + x^4 + x^3 + x^2 + 1.
std::uint8_t slow_mul(std::uint8_t a, std::uint8_t b) {
  unsigned acc = 0, x = a;
  for (int bit = 0; bit < 8; ++bit) {
    if (b & (1u << bit)) acc ^= x;
    x <<= 1;
    if (x & 0x100) x ^= 0x11d;
  }
  return static_cast<std::uint8_t>(acc);
}

TEST(Gf256, MultiplicationMatchesShiftAndAdd) {
  for (unsigned a = 0; a < 256; ++a)
    for (unsigned b = 0; b < 256; ++b)
      ASSERT_EQ(gf256::mul(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)),
                slow_mul(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)));
}

TEST(Gf256, InverseIsTwoSided) {
  for (unsigned a = 1; a < 256; ++a) EXPECT_EQ(gf256::mul(static_cast<std::uint8_t>(a), gf256::inv(static_cast<std::uint8_t>(a))), 1);
}

TEST(Gf256, MulAddAccumulates) {
  std::mt19937_64 rng(1);
  auto src = random_payload(64, rng), dst = random_payload(64, rng);
  auto expect = dst;
  for (std::size_t i = 0; i < src.size(); ++i) expect[i] ^= slow_mul(0x53, src[i]);
  gf256::mul_add(0x53, src, dst);
  EXPECT_EQ(dst, expect);
}

TEST(Gf256, MulAddMatchesScalarForEveryCoefficientAndLength) {
  // Lengths straddle the 32-byte vector width so the tail path runs too.
  std::mt19937_64 rng(2);
  for (unsigned c = 0; c < 256; ++c) {
    for (std::size_t len : {0u, 1u, 31u, 32u, 33u, 100u}) {
      auto src = random_payload(len, rng), dst = random_payload(len, rng);
      auto expect = dst;
      for (std::size_t i = 0; i < len; ++i) expect[i] ^= slow_mul(static_cast<std::uint8_t>(c), src[i]);
      gf256::mul_add(static_cast<std::uint8_t>(c), src, dst);
      ASSERT_EQ(dst, expect) << "c=" << c << " len=" << len;
    }
  }
}

TEST(ReedSolomon, SystematicTopIsIdentity) {
  ReedSolomon rs(10, 7);
  for (unsigned r = 0; r < 7; ++r)
    for (unsigned c = 0; c < 7; ++c) EXPECT_EQ(rs.coefficient(r, c), r == c ? 1 : 0);
}

TEST(ReedSolomon, EveryKRowSubmatrixInvertible) {
  // MDS holds iff every k x k submatrix of the generator is invertible.
  const unsigned n = 8, k = 4;
  ReedSolomon rs(n, k);
  std::vector<unsigned> rows(k);
  std::vector<bool> pick(n, false);
  std::fill(pick.end() - k, pick.end(), true);
  do {
    std::vector<std::uint8_t> m;
    for (unsigned r = 0; r < n; ++r)
      if (pick[r])
        for (unsigned c = 0; c < k; ++c) m.push_back(rs.coefficient(r, c));
    const auto inv = invert_matrix(m, k);
    for (unsigned i = 0; i < k; ++i)
      for (unsigned j = 0; j < k; ++j) {
        std::uint8_t acc = 0;
        for (unsigned x = 0; x < k; ++x) acc ^= gf256::mul(m[i * k + x], inv[x * k + j]);
        ASSERT_EQ(acc, i == j ? 1 : 0);
      }
  } while (std::next_permutation(pick.begin(), pick.end()));
}

TEST(Sha3, FipsVectors) {
  EXPECT_EQ(to_hex(hash_object({})), "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a");
  EXPECT_EQ(to_hex(hash_object(as_bytes("abc"))), "3a985da74fe225b2045c172d6bd390bd855f086e3e9d525b46bfe24511431532");
  Bytes ramp;
  for (int r = 0; r < 4; ++r)
    for (int i = 0; i < 256; ++i) ramp.push_back(static_cast<std::uint8_t>(i));
  EXPECT_EQ(to_hex(hash_object(ramp)), "b6c70631c6ff932b9f380d9cde8750eb9bea393817a9aea410c2119eb7b9b870");
}

TEST(Sha3, IncrementalMatchesOneShotAndDetectsBitFlips) {
  std::mt19937_64 rng(2);
  auto data = random_payload(10000, rng);
  Sha3Hasher h;
  h.update(ByteView(data).first(1));
  h.update(ByteView(data).subspan(1, 4000));
  h.update(ByteView(data).subspan(4001));
  EXPECT_EQ(h.finish(), hash_object(data));
  EXPECT_EQ(hash_object(data), hash_object(data));
  data[1234] ^= 0x10;
  EXPECT_NE(h.finish(), hash_object(data));
}

TEST(Split, PureStripingWhenKEqualsN) {
  const Bytes obj{1, 2, 3, 4};
  const auto s = split(obj, {2, 2});
  ASSERT_EQ(s.payloads.size(), 2u);
  EXPECT_EQ(s.payloads[0], (Bytes{1, 2}));
  EXPECT_EQ(s.payloads[1], (Bytes{3, 4}));
  EXPECT_EQ(s.pad_len, 0u);
}

TEST(Split, PadsToMultipleOfK) {
  const auto s = split(Bytes{9, 8, 7}, {3, 2});
  EXPECT_EQ(s.pad_len, 1u);
  for (const auto& p : s.payloads) EXPECT_EQ(p.size(), 2u);
}

TEST(Split, RejectsInvalidParams) {
  EXPECT_ERRC(split(Bytes{1}, {2, 3}), Errc::InvalidParams);
  EXPECT_ERRC(split(Bytes{1}, {3, 0}), Errc::InvalidParams);
  EXPECT_ERRC(split(Bytes{1}, {256, 2}), Errc::InvalidParams);
}

std::vector<Uuid> targets(std::size_t n) {
  std::vector<Uuid> out(n);
  for (auto& t : out) t = Uuid::random();
  return out;
}

std::vector<ChunkPackage> packages(const std::vector<EncodedChunk>& chunks) {
  std::vector<ChunkPackage> out;
  for (const auto& c : chunks) out.push_back(c.package);
  return out;
}

TEST(Codec, AnyTwoOfThreeRecoverFourBytes) {
  const Bytes obj{0xde, 0xad, 0xbe, 0xef};
  const auto all = packages(encode(obj, Uuid::random(), {3, 2}, targets(3)));
  for (int drop = 0; drop < 3; ++drop) {
    std::vector<ChunkPackage> subset;
    for (int i = 0; i < 3; ++i)
      if (i != drop) subset.push_back(all[i]);
    EXPECT_EQ(decode(subset, 2), obj) << "dropped " << drop;
  }
}

TEST(Codec, EncodePairsChunksWithTargets) {
  std::mt19937_64 rng(3);
  const auto obj = random_payload(1000, rng);
  const auto t = targets(10);
  const auto chunks = encode(obj, Uuid::random(), {10, 7}, t);
  ASSERT_EQ(chunks.size(), 10u);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    EXPECT_EQ(chunks[i].target, t[i]);
    EXPECT_EQ(chunks[i].package.chunk_index, i);
    EXPECT_EQ(chunks[i].package.object_hash, hash_object(obj));
    EXPECT_EQ(chunks[i].package.payload.size(), (1000 + 6) / 7);
  }
  EXPECT_EQ(chunks, encode(obj, chunks[0].package.object_uuid, {10, 7}, t));
}

TEST(Codec, RegularModeStoresObjectVerbatim) {
  const Bytes obj{5, 6, 7};
  const auto chunks = encode(obj, Uuid::random(), {1, 1}, targets(1));
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].package.payload, obj);
}

TEST(Codec, TooFewTargets) { EXPECT_ERRC(encode(Bytes{1}, Uuid::random(), {3, 2}, targets(2)), Errc::NotEnoughContainers); }

TEST(Codec, DataChunksAloneDecode) {
  std::mt19937_64 rng(4);
  const auto obj = random_payload(777, rng);
  auto all = packages(encode(obj, Uuid::random(), {6, 4}, targets(6)));
  all.resize(4);
  EXPECT_EQ(decode(all, 4), obj);
}

TEST(Codec, KMinusOneChunksFail) {
  std::mt19937_64 rng(5);
  auto all = packages(encode(random_payload(100, rng), Uuid::random(), {6, 4}, targets(6)));
  all.resize(3);
  EXPECT_ERRC(decode(all, 4), Errc::NotEnoughChunks);
}

TEST(Codec, CorruptedPayloadIsHashMismatch) {
  std::mt19937_64 rng(6);
  const auto obj = random_payload(500, rng);
  auto all = packages(encode(obj, Uuid::random(), {5, 3}, targets(5)));
  all[1].payload[10] ^= 0x01;
  std::vector<ChunkPackage> first3(all.begin(), all.begin() + 3);
  EXPECT_ERRC(decode(first3, 3), Errc::HashMismatch);
  EXPECT_EQ(decode_any_subset(all, 3), obj);
}

TEST(Codec, MixedHeadersRejected) {
  std::mt19937_64 rng(7);
  auto a = packages(encode(random_payload(50, rng), Uuid::random(), {3, 2}, targets(3)));
  auto b = packages(encode(random_payload(50, rng), Uuid::random(), {3, 2}, targets(3)));
  EXPECT_ERRC(decode(std::vector<ChunkPackage>{a[0], b[1]}, 2), Errc::InconsistentHeaders);
}

TEST(Codec, EmptyObjectRoundTrips) {
  const auto chunks = packages(encode(Bytes{}, Uuid::random(), {3, 2}, targets(3)));
  EXPECT_TRUE(decode(std::vector<ChunkPackage>{chunks[1], chunks[2]}, 2).empty());
}

TEST(Codec, ExhaustiveSubsetsSmallCodes) {
  std::mt19937_64 rng(8);
  for (unsigned n = 1; n <= 6; ++n)
    for (unsigned k = 1; k <= n; ++k) {
      const auto obj = random_payload(1 + rng() % 300, rng);
      const auto all = packages(encode(obj, Uuid::random(), {static_cast<std::uint16_t>(n), static_cast<std::uint16_t>(k)}, targets(n)));
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<ChunkPackage> subset;
        for (unsigned i = 0; i < n; ++i)
          if (mask & (1u << i)) subset.push_back(all[i]);
        if (subset.size() >= k)
          ASSERT_EQ(decode(subset, static_cast<std::uint16_t>(k)), obj) << n << "," << k << " mask " << mask;
        else
          EXPECT_ERRC(decode(subset, static_cast<std::uint16_t>(k)), Errc::NotEnoughChunks);
      }
    }
}

TEST(Codec, OverheadIsExactlyNOverKOfPaddedSize) {
  std::mt19937_64 rng(9);
  const auto obj = random_payload(1001, rng);
  const auto chunks = encode(obj, Uuid::random(), {12, 10}, targets(12));
  std::size_t total = 0;
  for (const auto& c : chunks) total += c.package.payload.size();
  EXPECT_EQ(total, 12u * ((1001 + 9) / 10));
}

// Little-endian layout built field by field, independent of pack().
Bytes reference_layout(const ChunkPackage& p) {
  Bytes out{'D', 'Y', 'N', '1'};
  out.insert(out.end(), p.object_uuid.bytes().begin(), p.object_uuid.bytes().end());
  const auto le = [&](std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  le(p.chunk_index, 2);
  le(p.n, 2);
  le(p.k, 2);
  le(p.pad_len, 4);
  out.insert(out.end(), p.object_hash.begin(), p.object_hash.end());
  le(p.payload.size(), 8);
  out.insert(out.end(), p.payload.begin(), p.payload.end());
  return out;
}

ChunkPackage sample_package() {
  ChunkPackage p;
  p.object_uuid = Uuid::parse("00112233-4455-6677-8899-aabbccddeeff");
  p.chunk_index = 0x0102;
  p.n = 0x0304;
  p.k = 0x0005;
  p.pad_len = 0x0a0b0c0d;
  for (int i = 0; i < 32; ++i) p.object_hash[i] = static_cast<std::uint8_t>(0xf0 + i);
  p.payload = {1, 2, 3};
  return p;
}

TEST(ChunkPackage, BitExactLittleEndianLayout) {
  auto p = sample_package();
  p.n = 0x0304;
  p.chunk_index = 0x0102;
  p.k = 5;
  const auto packed = pack(p);
  EXPECT_EQ(packed, reference_layout(p));
  EXPECT_EQ(packed.size(), kChunkHeaderSize + 3);
  EXPECT_EQ(packed[20], 0x02);
  EXPECT_EQ(packed[21], 0x01);
}

TEST(ChunkPackage, RoundTrip) {
  auto p = sample_package();
  p.n = 10;
  p.k = 7;
  p.chunk_index = 9;
  EXPECT_EQ(unpack(pack(p)), p);
}

TEST(ChunkPackage, DetectsBadMagicAndTruncation) {
  auto p = sample_package();
  p.n = 10;
  p.k = 7;
  p.chunk_index = 9;
  auto bytes = pack(p);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_ERRC(unpack(bad), Errc::BadMagic);
  bytes.pop_back();
  EXPECT_ERRC(unpack(bytes), Errc::Truncated);
  bytes.resize(30);
  EXPECT_ERRC(unpack(bytes), Errc::Truncated);
}

}  // namespace
}  // namespace dynostore::erasure
