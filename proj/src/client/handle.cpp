#include "dynostore/client/handle.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "dynostore/client/crypto.hpp"
#include "dynostore/domain/error.hpp"

namespace dynostore::client {

namespace {
constexpr std::string_view kScheme = "dyn://";
constexpr std::size_t kPrefixLen = 8;
}  // namespace

std::string ReferenceHandle::str() const {
  return std::string(kScheme) + path.str() + "@" + std::to_string(version) + "#" + hash_prefix;
}

ReferenceHandle ReferenceHandle::parse(std::string_view text) {
  auto bad = [&] { return Error(Errc::BadRequest, "malformed reference handle '" + std::string(text) + "'"); };
  if (!text.starts_with(kScheme)) throw bad();
  const auto hash = text.rfind('#');
  const auto at = text.rfind('@', hash);
  if (hash == std::string_view::npos || at == std::string_view::npos || at < kScheme.size()) throw bad();
  const auto prefix = text.substr(hash + 1);
  if (prefix.size() != kPrefixLen ||
      !std::all_of(prefix.begin(), prefix.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); })) {
    throw bad();
  }
  const auto digits = text.substr(at + 1, hash - at - 1);
  std::uint32_t version = 0;
  auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), version);
  if (ec != std::errc{} || end != digits.data() + digits.size() || digits.empty()) throw bad();
  return ReferenceHandle{ObjectPath::parse(text.substr(kScheme.size(), at - kScheme.size())), version,
                         std::string(prefix)};
}

ReferenceHandle make_handle(const ObjectDescriptor& d) {
  std::string checksum = is_encrypted_tag(d.client_tag) ? d.client_tag.substr(kEncryptedTagPrefix.size())
                                                         : to_hex(d.object_hash);
  return ReferenceHandle{d.path, d.version, checksum.substr(0, kPrefixLen)};
}

}  // namespace dynostore::client
