#include "dynostore/domain/json.hpp"

#include "dynostore/domain/error.hpp"

namespace dynostore {

void to_json(Json& j, const Uuid& id) { j = id.to_string(); }
void from_json(const Json& j, Uuid& id) { id = Uuid::parse(j.get<std::string>()); }


void to_json(Json& j, const ChunkLocation& loc) { j = Json{{"index", loc.index}, {"container", loc.container}}; }
void from_json(const Json& j, ChunkLocation& loc) {
  j.at("index").get_to(loc.index);
  j.at("container").get_to(loc.container);
}

void to_json(Json& j, const ObjectDescriptor& d) {
  j = Json{{"object_uuid", d.object_uuid},
           {"path", d.path},
           {"size_bytes", d.size_bytes},
           {"object_hash", to_hex(d.object_hash)},
           {"n", d.n},
           {"k", d.k},
           {"chunk_locations", d.chunk_locations},
           {"owner", d.owner},
           {"created_at", d.created_at},
           {"version", d.version},
           {"client_tag", d.client_tag}};
  j["version_of"] = d.version_of ? Json(*d.version_of) : Json(nullptr);
}

void from_json(const Json& j, ObjectDescriptor& d) {
  j.at("object_uuid").get_to(d.object_uuid);
  d.path = j.at("path").get<ObjectPath>();
  j.at("size_bytes").get_to(d.size_bytes);
  d.object_hash = digest_from_hex(j.at("object_hash").get<std::string>());
  j.at("n").get_to(d.n);
  j.at("k").get_to(d.k);
  j.at("chunk_locations").get_to(d.chunk_locations);
  d.owner = j.value("owner", "");
  d.created_at = j.value("created_at", std::int64_t{0});
  d.version = j.value("version", 0u);
  d.client_tag = j.value("client_tag", "");
  if (j.contains("version_of") && !j["version_of"].is_null()) {
    d.version_of = j["version_of"].get<Uuid>();
  } else {
    d.version_of.reset();
  }
}

void to_json(Json& j, const ContainerState& s) {
  j = Json{{"container_id", s.container_id},
           {"endpoint", s.endpoint},
           {"name", s.name},
           {"mem_total", s.mem_total},
           {"mem_available", s.mem_available},
           {"fs_total", s.fs_total},
           {"fs_available", s.fs_available},
           {"annual_failure_rate", s.annual_failure_rate},
           {"healthy", s.healthy},
           {"last_probe", s.last_probe},
           {"chunk_count", s.chunk_count},
           {"cache_hits", s.cache_hits},
           {"cache_misses", s.cache_misses}};
}

void from_json(const Json& j, ContainerState& s) {
  j.at("container_id").get_to(s.container_id);
  s.endpoint = j.value("endpoint", "");
  s.name = j.value("name", "");
  j.at("mem_total").get_to(s.mem_total);
  j.at("mem_available").get_to(s.mem_available);
  j.at("fs_total").get_to(s.fs_total);
  j.at("fs_available").get_to(s.fs_available);
  s.annual_failure_rate = j.value("annual_failure_rate", 0.0);
  s.healthy = j.value("healthy", true);
  s.last_probe = j.value("last_probe", std::int64_t{0});
  s.chunk_count = j.value("chunk_count", std::uint64_t{0});
  s.cache_hits = j.value("cache_hits", std::uint64_t{0});
  s.cache_misses = j.value("cache_misses", std::uint64_t{0});
}

void to_json(Json& j, const Permission& p) {
  j = Json{{"subject", p.subject}, {"mode", mode_name(p.mode)}, {"scope", p.scope}, {"deny", p.deny}};
}

void from_json(const Json& j, Permission& p) {
  j.at("subject").get_to(p.subject);
  p.mode = parse_mode(j.at("mode").get<std::string>());
  p.scope = j.at("scope").get<ObjectPath>();
  p.deny = j.value("deny", false);
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(Errc::BadRequest, std::string("malformed JSON body: ") + e.what());
  }
}

}  // namespace dynostore
