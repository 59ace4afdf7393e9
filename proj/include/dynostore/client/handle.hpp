#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "dynostore/domain/types.hpp"

namespace dynostore::client {

// Pass-by-reference token for a stored object version:
//   dyn://{path}@{version}#{first 8 hex chars of the plaintext SHA3-256}
struct ReferenceHandle {
  ObjectPath path;
  std::uint32_t version = 0;
  std::string hash_prefix;

  std::string str() const;
  // Throws BadRequest on malformed input.
  static ReferenceHandle parse(std::string_view text);
  bool operator==(const ReferenceHandle&) const = default;
};

// The checksum comes from the client tag when the object was encrypted,
// else from the stored object hash.
ReferenceHandle make_handle(const ObjectDescriptor& descriptor);

}  // namespace dynostore::client
