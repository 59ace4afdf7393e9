#include "dynostore/erasure/gf256.hpp"

#include <array>
#include <cstring>

#if defined(__x86_64__)
#include <immintrin.h>
#endif

namespace dynostore::erasure::gf256 {

namespace {

struct Tables {
  std::array<std::uint8_t, 512> exp{};
  std::array<int, 256> log{};
  std::array<std::array<std::uint8_t, 256>, 256> mul{};
  // Products with the low and high nibble of x: mul[c][x] == lo[c][x & 15] ^ hi[c][x >> 4].
  std::array<std::array<std::uint8_t, 16>, 256> lo{};
  std::array<std::array<std::uint8_t, 16>, 256> hi{};

  Tables() {
    unsigned x = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = static_cast<std::uint8_t>(x);
      log[x] = i;
      x <<= 1;
      if (x & 0x100) x ^= 0x11d;
    }
    for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
    log[0] = -1;
    for (int a = 0; a < 256; ++a) {
      for (int b = 0; b < 256; ++b) {
        mul[a][b] = (a == 0 || b == 0) ? 0 : exp[log[a] + log[b]];
      }
      for (int x = 0; x < 16; ++x) {
        lo[a][x] = mul[a][x];
        hi[a][x] = mul[a][x << 4];
      }
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

#if defined(__x86_64__)
// Split-nibble lookup, 32 bytes per step; returns how many bytes it handled.
__attribute__((target("avx2"))) std::size_t mul_add_avx2(const std::uint8_t* lo, const std::uint8_t* hi,
                                                          const std::uint8_t* src, std::uint8_t* dst,
                                                          std::size_t len) {
  const __m256i lo_tbl = _mm256_broadcastsi128_si256(_mm_loadu_si128(reinterpret_cast<const __m128i*>(lo)));
  const __m256i hi_tbl = _mm256_broadcastsi128_si256(_mm_loadu_si128(reinterpret_cast<const __m128i*>(hi)));
  const __m256i mask = _mm256_set1_epi8(0x0f);
  std::size_t i = 0;
  for (; i + 32 <= len; i += 32) {
    const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    const __m256i l = _mm256_shuffle_epi8(lo_tbl, _mm256_and_si256(x, mask));
    const __m256i h = _mm256_shuffle_epi8(hi_tbl, _mm256_and_si256(_mm256_srli_epi64(x, 4), mask));
    __m256i* out = reinterpret_cast<__m256i*>(dst + i);
    _mm256_storeu_si256(out, _mm256_xor_si256(_mm256_loadu_si256(out), _mm256_xor_si256(l, h)));
  }
  return i;
}

bool has_avx2() {
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported;
}
#endif

}  // namespace

std::uint8_t mul(std::uint8_t a, std::uint8_t b) noexcept { return tables().mul[a][b]; }

std::uint8_t inv(std::uint8_t a) noexcept {
  const auto& t = tables();
  return t.exp[255 - t.log[a]];
}

const std::uint8_t* mul_row(std::uint8_t c) noexcept { return tables().mul[c].data(); }

void mul_add(std::uint8_t c, std::span<const std::uint8_t> src, std::span<std::uint8_t> dst) noexcept {
  if (c == 0) return;
  const std::size_t len = src.size() < dst.size() ? src.size() : dst.size();
  if (c == 1) {
    for (std::size_t i = 0; i < len; ++i) dst[i] ^= src[i];
    return;
  }
  std::size_t i = 0;
#if defined(__x86_64__)
  if (has_avx2()) i = mul_add_avx2(tables().lo[c].data(), tables().hi[c].data(), src.data(), dst.data(), len);
#endif
  const std::uint8_t* row = mul_row(c);
  for (; i < len; ++i) dst[i] ^= row[src[i]];
}

}  // namespace dynostore::erasure::gf256
