#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dynostore {

inline constexpr std::size_t kMaxPathBytes = 4096;

// Absolute location in the federated namespace. The first segment is the
// owning namespace (user); the rest are collections and, for objects, the
// object name. Canonical form is "/" + segments joined by "/".
class ObjectPath {
 public:
  // Leading "/" is optional. Empty segments, "." / "..", embedded NUL and
  // over-long paths are rejected (EmptyPath, IllegalCharacter, PathTooLong).
  static ObjectPath parse(std::string_view raw);
  static ObjectPath from_segments(std::vector<std::string> segments);

  const std::vector<std::string>& segments() const { return segments_; }
  const std::string& namespace_name() const { return segments_.front(); }
  const std::string& name() const { return segments_.back(); }
  std::size_t depth() const { return segments_.size(); }
  bool is_root() const { return segments_.size() == 1; }

  std::string str() const;
  ObjectPath parent() const;
  ObjectPath child(std::string_view segment) const;
  // True when this path equals `other` or is one of its ancestors.
  bool contains(const ObjectPath& other) const;

  auto operator<=>(const ObjectPath&) const = default;

 private:
  explicit ObjectPath(std::vector<std::string> segments) : segments_(std::move(segments)) {}

  std::vector<std::string> segments_;
};

}  // namespace dynostore
