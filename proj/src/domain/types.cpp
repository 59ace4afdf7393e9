#include "dynostore/domain/types.hpp"

#include <charconv>
#include <set>

#include "dynostore/domain/error.hpp"

namespace dynostore {

std::string_view mode_name(Mode mode) noexcept {
  switch (mode) {
    case Mode::Read: return "read";
    case Mode::Write: return "write";
    case Mode::Admin: return "admin";
  }
  return "read";
}

Mode parse_mode(std::string_view text) {
  if (text == "read") return Mode::Read;
  if (text == "write") return Mode::Write;
  if (text == "admin") return Mode::Admin;
  throw Error(Errc::BadRequest, "unknown mode '" + std::string(text) + "'");
}

void validate_descriptor(const ObjectDescriptor& d) {
  if (d.k < 1 || d.k > d.n || d.n > 255) {
    throw Error(Errc::InvalidDescriptor, "invalid (n,k)=(" + std::to_string(d.n) + "," + std::to_string(d.k) + ")");
  }
  if (d.chunk_locations.size() != d.n) throw Error(Errc::InvalidDescriptor, "chunk_locations must have n entries");
  std::vector<bool> seen(d.n, false);
  std::set<Uuid> containers;
  for (const auto& loc : d.chunk_locations) {
    if (loc.index >= d.n || seen[loc.index]) throw Error(Errc::InvalidDescriptor, "chunk indices must be 0..n-1");
    seen[loc.index] = true;
    containers.insert(loc.container);
  }
  if (d.n > 1 && containers.size() != d.n) {
    throw Error(Errc::InvalidDescriptor, "resilient chunks must land on distinct containers");
  }
}

void validate_state(const ContainerState& s) {
  if (s.mem_available > s.mem_total || s.fs_available > s.fs_total) {
    throw Error(Errc::InvalidParams, "available exceeds total for container " + s.container_id.to_string());
  }
  if (!(s.annual_failure_rate >= 0.0 && s.annual_failure_rate <= 1.0)) {
    throw Error(Errc::InvalidParams, "annual_failure_rate outside [0,1]");
  }
}

std::string ChunkKey::str() const { return object.to_string() + "." + std::to_string(index); }

ChunkKey ChunkKey::parse(std::string_view text) {
  auto dot = text.rfind('.');
  if (dot == std::string_view::npos) throw Error(Errc::BadRequest, "malformed chunk id");
  ChunkKey key;
  key.object = Uuid::parse(text.substr(0, dot));
  auto digits = text.substr(dot + 1);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || value > 0xffff || digits.empty()) {
    throw Error(Errc::BadRequest, "malformed chunk index");
  }
  key.index = static_cast<std::uint16_t>(value);
  return key;
}

}  // namespace dynostore
