#include "dynostore/domain/error.hpp"

#include <array>

namespace dynostore {

namespace {

constexpr std::array kNames = {
#define X(name) std::string_view{#name},
    DYNOSTORE_ERRC_LIST(X)
#undef X
};

}  // namespace

std::string_view errc_name(Errc code) noexcept {
  auto idx = static_cast<std::size_t>(code);
  return idx < kNames.size() ? kNames[idx] : std::string_view{"Unknown"};
}

std::optional<Errc> errc_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<Errc>(i);
  }
  return std::nullopt;
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

}  // namespace dynostore
