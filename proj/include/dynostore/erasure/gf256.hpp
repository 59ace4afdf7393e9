#pragma once

#include <cstdint>
#include <span>

namespace dynostore::erasure::gf256 {

// Arithmetic in GF(2^8) with the primitive polynomial x^8+x^4+x^3+x^2+1 (0x11d).

std::uint8_t mul(std::uint8_t a, std::uint8_t b) noexcept;
// Precondition: a != 0.
std::uint8_t inv(std::uint8_t a) noexcept;
inline std::uint8_t add(std::uint8_t a, std::uint8_t b) noexcept { return a ^ b; }

// Row of the full multiplication table: mul_row(c)[x] == mul(c, x).
const std::uint8_t* mul_row(std::uint8_t c) noexcept;

// dst[i] ^= c * src[i]
void mul_add(std::uint8_t c, std::span<const std::uint8_t> src, std::span<std::uint8_t> dst) noexcept;

}  // namespace dynostore::erasure::gf256
