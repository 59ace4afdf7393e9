#include "dynostore/domain/path.hpp"

#include "dynostore/domain/error.hpp"

namespace dynostore {

namespace {

void check_segment(std::string_view seg, std::string_view raw) {
  if (seg.empty()) throw Error(Errc::IllegalCharacter, "empty segment in '" + std::string(raw) + "'");
  if (seg == "." || seg == "..") throw Error(Errc::IllegalCharacter, "relative segment in '" + std::string(raw) + "'");
  for (char c : seg) {
    if (c == '/' || c == '\0') throw Error(Errc::IllegalCharacter, "illegal character in path segment");
  }
}

}  // namespace

ObjectPath ObjectPath::parse(std::string_view raw) {
  std::string_view rest = raw;
  if (!rest.empty() && rest.front() == '/') rest.remove_prefix(1);
  if (rest.empty()) throw Error(Errc::EmptyPath, "path is empty");
  if (rest.size() + 1 > kMaxPathBytes) throw Error(Errc::PathTooLong, "path exceeds 4096 bytes");

  std::vector<std::string> segments;
  while (true) {
    auto slash = rest.find('/');
    auto seg = rest.substr(0, slash);
    check_segment(seg, raw);
    segments.emplace_back(seg);
    if (slash == std::string_view::npos) break;
    rest.remove_prefix(slash + 1);
  }
  return ObjectPath(std::move(segments));
}

ObjectPath ObjectPath::from_segments(std::vector<std::string> segments) {
  if (segments.empty()) throw Error(Errc::EmptyPath, "path has no segments");
  std::size_t len = 0;
  for (const auto& s : segments) {
    check_segment(s, s);
    len += s.size() + 1;
  }
  if (len > kMaxPathBytes) throw Error(Errc::PathTooLong, "path exceeds 4096 bytes");
  return ObjectPath(std::move(segments));
}

std::string ObjectPath::str() const {
  std::string out;
  for (const auto& s : segments_) {
    out.push_back('/');
    out += s;
  }
  return out;
}

ObjectPath ObjectPath::parent() const {
  if (is_root()) throw Error(Errc::ParentNotFound, "namespace root has no parent");
  return ObjectPath(std::vector<std::string>(segments_.begin(), segments_.end() - 1));
}

ObjectPath ObjectPath::child(std::string_view segment) const {
  auto segs = segments_;
  segs.emplace_back(segment);
  return from_segments(std::move(segs));
}

bool ObjectPath::contains(const ObjectPath& other) const {
  if (segments_.size() > other.segments_.size()) return false;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i] != other.segments_[i]) return false;
  }
  return true;
}

}  // namespace dynostore
