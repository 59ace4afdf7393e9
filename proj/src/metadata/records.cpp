#include "dynostore/metadata/records.hpp"

#include <algorithm>

#include "dynostore/domain/error.hpp"

namespace dynostore::metadata {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

ObjectRecord& as_object(Record& record) {
  if (!std::holds_alternative<ObjectRecord>(record)) record = ObjectRecord{};
  return std::get<ObjectRecord>(record);
}

}  // namespace

void apply_update(Record& record, const Update& update) {
  std::visit(Overloaded{
                 [&](const CreateCollection& u) { record = CollectionRecord{u.owner, u.is_namespace, u.id}; },
                 [&](const PutVersion& u) {
                   auto& obj = as_object(record);
                   if (!obj.versions.empty()) obj.versions.back().superseded_at = u.descriptor.created_at;
                   obj.versions.push_back(VersionEntry{u.descriptor, false, 0});
                 },
                 [&](const Evict&) { record = std::monostate{}; },
                 [&](const Grant& u) {
                   if (!std::holds_alternative<AclRecord>(record)) record = AclRecord{};
                   std::get<AclRecord>(record).entries[u.permission.subject] = {u.permission.mode, u.permission.deny};
                 },
                 [&](const Purge& u) {
                   if (!std::holds_alternative<ObjectRecord>(record)) return;
                   auto& obj = std::get<ObjectRecord>(record);
                   for (std::size_t i = 0; i + 1 < obj.versions.size(); ++i) {
                     auto& v = obj.versions[i];
                     if (std::find(u.versions.begin(), u.versions.end(), v.descriptor.object_uuid) != u.versions.end()) {
                       v.expired = true;
                     }
                   }
                 },
                 [&](const SetRetention& u) {
                   if (std::holds_alternative<ObjectRecord>(record)) std::get<ObjectRecord>(record).retention_days = u.days;
                 },
             },
             update);
}

std::string collection_key(const ObjectPath& path) { return "c:" + path.str(); }
std::string object_key(const ObjectPath& path) { return "o:" + path.str(); }
std::string acl_key(const ObjectPath& path) { return "a:" + path.str(); }

void to_json(Json& j, const Timestamp& ts) { j = Json::array({ts.wall_ms, ts.proposer}); }
void from_json(const Json& j, Timestamp& ts) {
  ts.wall_ms = j.at(0).get<std::int64_t>();
  ts.proposer = j.at(1).get<std::uint32_t>();
}

void to_json(Json& j, const Update& u) {
  std::visit(Overloaded{
                 [&](const CreateCollection& x) {
                   j = Json{{"op", "create_collection"}, {"owner", x.owner}, {"is_namespace", x.is_namespace}, {"id", x.id}};
                 },
                 [&](const PutVersion& x) { j = Json{{"op", "put_version"}, {"descriptor", x.descriptor}}; },
                 [&](const Evict&) { j = Json{{"op", "evict"}}; },
                 [&](const Grant& x) { j = Json{{"op", "grant"}, {"permission", x.permission}}; },
                 [&](const Purge& x) { j = Json{{"op", "purge"}, {"versions", x.versions}}; },
                 [&](const SetRetention& x) { j = Json{{"op", "set_retention"}, {"days", x.days}}; },
             },
             u);
}

void from_json(const Json& j, Update& u) {
  const auto op = j.at("op").get<std::string>();
  if (op == "create_collection") {
    u = CreateCollection{j.at("owner").get<std::string>(), j.value("is_namespace", false), j.at("id").get<Uuid>()};
  } else if (op == "put_version") {
    u = PutVersion{j.at("descriptor").get<ObjectDescriptor>()};
  } else if (op == "evict") {
    u = Evict{};
  } else if (op == "grant") {
    u = Grant{j.at("permission").get<Permission>()};
  } else if (op == "purge") {
    u = Purge{j.at("versions").get<std::vector<Uuid>>()};
  } else if (op == "set_retention") {
    u = SetRetention{j.at("days").get<std::uint32_t>()};
  } else {
    throw Error(Errc::BadRequest, "unknown update op '" + op + "'");
  }
}

void to_json(Json& j, const Record& r) {
  std::visit(Overloaded{
                 [&](const std::monostate&) { j = nullptr; },
                 [&](const CollectionRecord& x) {
                   j = Json{{"type", "collection"}, {"owner", x.owner}, {"is_namespace", x.is_namespace}, {"id", x.id}};
                 },
                 [&](const ObjectRecord& x) {
                   Json versions = Json::array();
                   for (const auto& v : x.versions) {
                     versions.push_back(
                         Json{{"descriptor", v.descriptor}, {"expired", v.expired}, {"superseded_at", v.superseded_at}});
                   }
                   j = Json{{"type", "object"}, {"versions", versions}, {"retention_days", x.retention_days}};
                 },
                 [&](const AclRecord& x) {
                   Json entries = Json::object();
                   for (const auto& [user, e] : x.entries) {
                     entries[user] = Json{{"mode", mode_name(e.mode)}, {"deny", e.deny}};
                   }
                   j = Json{{"type", "acl"}, {"entries", entries}};
                 },
             },
             r);
}

void from_json(const Json& j, Record& r) {
  if (j.is_null()) {
    r = std::monostate{};
    return;
  }
  const auto type = j.at("type").get<std::string>();
  if (type == "collection") {
    r = CollectionRecord{j.at("owner").get<std::string>(), j.value("is_namespace", false), j.at("id").get<Uuid>()};
  } else if (type == "object") {
    ObjectRecord obj;
    obj.retention_days = j.value("retention_days", kDefaultRetentionDays);
    for (const auto& v : j.at("versions")) {
      obj.versions.push_back(VersionEntry{v.at("descriptor").get<ObjectDescriptor>(), v.value("expired", false),
                                          v.value("superseded_at", std::int64_t{0})});
    }
    r = std::move(obj);
  } else if (type == "acl") {
    AclRecord acl;
    for (const auto& [user, e] : j.at("entries").items()) {
      acl.entries[user] = AclEntry{parse_mode(e.at("mode").get<std::string>()), e.value("deny", false)};
    }
    r = std::move(acl);
  } else {
    throw Error(Errc::BadRequest, "unknown record type '" + type + "'");
  }
}

}  // namespace dynostore::metadata
