#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace dynostore {

// 128-bit identifier, random version-4 layout. Rendered as lowercase
// hyphenated hex everywhere it crosses a process boundary.
class Uuid {
 public:
  Uuid() = default;

  static Uuid random();
  static Uuid random(std::mt19937_64& rng);
  static Uuid parse(std::string_view text);
  static Uuid from_bytes(std::span<const std::uint8_t, 16> bytes);

  std::string to_string() const;
  bool is_nil() const;
  const std::array<std::uint8_t, 16>& bytes() const { return bytes_; }

  auto operator<=>(const Uuid&) const = default;

 private:
  std::array<std::uint8_t, 16> bytes_{};
};

}  // namespace dynostore

template <>
struct std::hash<dynostore::Uuid> {
  std::size_t operator()(const dynostore::Uuid& id) const noexcept {
    std::size_t h = 0;
    for (auto b : id.bytes()) h = h * 131 + b;
    return h;
  }
};
