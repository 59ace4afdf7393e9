#pragma once

// JSON encodings of the domain types used in every wire message and on-disk
// record. UUIDs are lowercase hyphenated hex; digests are lowercase hex.

#include <json.hpp>

#include "dynostore/domain/types.hpp"

namespace dynostore {

using Json = nlohmann::json;

void to_json(Json& j, const Uuid& id);
void from_json(const Json& j, Uuid& id);
void to_json(Json& j, const ChunkLocation& loc);
void from_json(const Json& j, ChunkLocation& loc);
void to_json(Json& j, const ObjectDescriptor& d);
void from_json(const Json& j, ObjectDescriptor& d);
void to_json(Json& j, const ContainerState& s);
void from_json(const Json& j, ContainerState& s);
void to_json(Json& j, const Permission& p);
void from_json(const Json& j, Permission& p);

// Parses a request body, mapping parse failures to Error(BadRequest).
Json parse_json(std::string_view text);

}  // namespace dynostore

// ObjectPath has no empty state, so it deserialises by value.
template <>
struct nlohmann::adl_serializer<dynostore::ObjectPath> {
  static dynostore::ObjectPath from_json(const nlohmann::json& j) {
    return dynostore::ObjectPath::parse(j.get<std::string>());
  }
  static void to_json(nlohmann::json& j, const dynostore::ObjectPath& p) { j = p.str(); }
};
