#include "dynostore/metadata/service.hpp"

#include <algorithm>
#include <future>
#include <thread>

#include "dynostore/domain/error.hpp"
#include "dynostore/metadata/round.hpp"

namespace dynostore::metadata {

namespace {

const ObjectRecord* object_of(const KeyState& s) { return std::get_if<ObjectRecord>(&s.record); }

std::vector<ObjectDescriptor> live_versions(const ObjectRecord& obj) {
  std::vector<ObjectDescriptor> out;
  for (const auto& v : obj.versions) {
    if (!v.expired) out.push_back(v.descriptor);
  }
  return out;
}

// Superseded, unexpired versions whose retention window has run out. The
// head never qualifies.
std::vector<ObjectDescriptor> expired_versions(const ObjectRecord& obj, std::int64_t now_ms) {
  std::vector<ObjectDescriptor> out;
  const std::int64_t window = static_cast<std::int64_t>(obj.retention_days) * kMillisPerDay;
  for (std::size_t i = 0; i + 1 < obj.versions.size(); ++i) {
    const auto& v = obj.versions[i];
    if (!v.expired && v.superseded_at > 0 && now_ms - v.superseded_at > window) out.push_back(v.descriptor);
  }
  return out;
}

}  // namespace

std::vector<std::string> permission_keys(const ObjectPath& path) {
  std::vector<std::string> keys{collection_key(ObjectPath::from_segments({path.namespace_name()}))};
  for (std::size_t depth = 1; depth <= path.depth(); ++depth) {
    std::vector<std::string> prefix(path.segments().begin(), path.segments().begin() + depth);
    keys.push_back(acl_key(ObjectPath::from_segments(std::move(prefix))));
  }
  return keys;
}

bool permits(const std::map<std::string, KeyState>& states, const ObjectPath& path, const UserId& user, Mode mode) {
  auto root = states.find(collection_key(ObjectPath::from_segments({path.namespace_name()})));
  if (root != states.end()) {
    if (const auto* c = std::get_if<CollectionRecord>(&root->second.record); c && c->owner == user) return true;
  }
  for (std::size_t depth = path.depth(); depth >= 1; --depth) {
    std::vector<std::string> prefix(path.segments().begin(), path.segments().begin() + depth);
    auto it = states.find(acl_key(ObjectPath::from_segments(std::move(prefix))));
    if (it == states.end()) continue;
    const auto* acl = std::get_if<AclRecord>(&it->second.record);
    if (!acl) continue;
    auto entry = acl->entries.find(user);
    if (entry == acl->entries.end()) continue;
    if (entry->second.deny) return false;
    return static_cast<int>(mode) <= static_cast<int>(entry->second.mode);
  }
  return false;
}

MetadataService::MetadataService(std::vector<std::shared_ptr<ReplicaTransport>> replicas,
                                 const management::TokenAuthority& auth, const Clock& clock, Options options)
    : replicas_(std::move(replicas)), auth_(auth), clock_(clock), options_(options) {
  if (replicas_.empty()) throw Error(Errc::InvalidParams, "metadata service needs at least one replica");
}

template <class Fn>
void MetadataService::fan_out(Fn&& fn) {
  std::vector<std::future<void>> pending;
  for (std::size_t i = 0; i < replicas_.size(); ++i) {
    if (replicas_[i]->remote()) {
      pending.push_back(std::async(std::launch::async, [&fn, i, this] { fn(i, *replicas_[i]); }));
    } else {
      fn(i, *replicas_[i]);
    }
  }
  for (auto& f : pending) f.get();
}

Timestamp MetadataService::next_timestamp() {
  std::lock_guard lock(ts_mu_);
  last_wall_ = std::max(clock_.now_ms(), last_wall_ + 1);
  return Timestamp{last_wall_, options_.proposer_id};
}

void MetadataService::observe(const Timestamp& ts) {
  std::lock_guard lock(ts_mu_);
  last_wall_ = std::max(last_wall_, ts.wall_ms);
}

std::map<std::string, KeyState> MetadataService::read_once(const std::vector<std::string>& keys, bool& any_pending) {
  std::mutex mu;
  std::size_t answered = 0;
  std::map<std::string, KeyState> merged;
  any_pending = false;
  fan_out([&](std::size_t, ReplicaTransport& r) {
    std::map<std::string, KeyState> got;
    try {
      got = r.read(keys);
    } catch (const Error& e) {
      if (e.code() != Errc::Unavailable) throw;
      return;
    }
    std::lock_guard lock(mu);
    ++answered;
    for (auto& [key, state] : got) {
      if (state.pending) any_pending = true;
      auto it = merged.find(key);
      if (it == merged.end() || it->second.committed < state.committed) {
        bool pending = it != merged.end() && it->second.pending;
        merged[key] = std::move(state);
        merged[key].pending = merged[key].pending || pending;
      } else if (state.pending) {
        it->second.pending = true;
      }
    }
  });
  if (answered == 0) throw Error(Errc::Unavailable, "no metadata replica reachable");
  return merged;
}

std::map<std::string, KeyState> MetadataService::quorum_read(const std::vector<std::string>& keys) {
  const auto deadline = std::chrono::steady_clock::now() + options_.lock_wait;
  auto delay = std::chrono::milliseconds(1);
  while (true) {
    bool pending = false;
    auto merged = read_once(keys, pending);
    if (!pending || std::chrono::steady_clock::now() >= deadline) return merged;
    std::this_thread::sleep_for(delay);
    delay = std::min(delay * 2, std::chrono::milliseconds(50));
  }
}

std::map<std::string, KeyState> MetadataService::scan_all(const std::string& prefix) {
  std::mutex mu;
  std::size_t answered = 0;
  std::map<std::string, KeyState> merged;
  fan_out([&](std::size_t, ReplicaTransport& r) {
    std::map<std::string, KeyState> got;
    try {
      got = r.scan(prefix);
    } catch (const Error& e) {
      if (e.code() != Errc::Unavailable) throw;
      return;
    }
    std::lock_guard lock(mu);
    ++answered;
    for (auto& [key, state] : got) {
      auto it = merged.find(key);
      if (it == merged.end() || it->second.committed < state.committed) merged[key] = std::move(state);
    }
  });
  if (answered == 0) throw Error(Errc::Unavailable, "no metadata replica reachable");
  return merged;
}

void MetadataService::repair(std::size_t behind, const std::string& key, const std::vector<std::size_t>& sources) {
  for (auto src : sources) {
    try {
      replicas_[behind]->absorb(replicas_[src]->log_for_key(key));
      return;
    } catch (const Error& e) {
      if (e.code() != Errc::Unavailable) throw;
    }
  }
}

MetadataService::RoundOutcome MetadataService::run_round(const Proposal& p) {
  const auto started = std::chrono::steady_clock::now();
  ProposalRound round(p, replicas_.size());
  std::mutex mu;
  fan_out([&](std::size_t i, ReplicaTransport& r) {
    try {
      auto vote = r.propose(p);
      std::lock_guard lock(mu);
      round.on_vote(i, vote);
    } catch (const Error& e) {
      if (e.code() != Errc::Unavailable) throw;
      std::lock_guard lock(mu);
      round.on_unreachable(i);
    }
  });
  observe(round.highest_seen());

  const bool in_lease = std::chrono::steady_clock::now() - started < options_.lease / 2;
  if (round.decision() != ProposalRound::Decision::Commit || !in_lease) {
    fan_out([&](std::size_t i, ReplicaTransport& r) {
      if (!round.accepted_by(i)) return;
      try {
        r.abort(p);
      } catch (const Error& e) {
        if (e.code() != Errc::Unavailable) throw;
      }
    });
    if (round.saw(VoteReason::BaseMismatch)) return RoundOutcome::BaseMismatch;
    if (round.saw(VoteReason::Locked)) return RoundOutcome::Locked;
    if (round.saw(VoteReason::StaleTimestamp)) return RoundOutcome::StaleTimestamp;
    return RoundOutcome::Unreachable;
  }

  std::vector<std::size_t> applied;
  std::vector<std::size_t> behind;
  fan_out([&](std::size_t i, ReplicaTransport& r) {
    try {
      auto result = r.commit(p);
      std::lock_guard lock(mu);
      if (result == CommitResult::Behind) {
        behind.push_back(i);
      } else {
        applied.push_back(i);
        round.on_commit_ack(i);
      }
    } catch (const Error& e) {
      if (e.code() != Errc::Unavailable) throw;
    }
  });
  for (auto i : behind) {
    repair(i, p.key, applied);
    try {
      if (replicas_[i]->commit(p) != CommitResult::Behind) round.on_commit_ack(i);
    } catch (const Error& e) {
      if (e.code() != Errc::Unavailable) throw;
    }
  }
  if (!round.committed_by_majority()) {
    throw Error(Errc::ConsensusFailed, "commit of " + p.key + " acknowledged by " +
                                           std::to_string(round.commit_acks()) + " of " +
                                           std::to_string(replicas_.size()) + " replicas");
  }
  return RoundOutcome::Committed;
}

std::optional<KeyState> MetadataService::write_key(const std::string& key, const MakeUpdate& make,
                                                   std::optional<Uuid> update_id) {
  auto backoff = std::chrono::milliseconds(1);
  for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
    auto current = quorum_read({key})[key];
    auto update = make(current);
    if (!update) return std::nullopt;
    Proposal p{key, current.head, update_id.value_or(Uuid::random()), next_timestamp(), std::move(*update)};
    switch (run_round(p)) {
      case RoundOutcome::Committed:
        return current;
      case RoundOutcome::BaseMismatch:
      case RoundOutcome::StaleTimestamp:
        break;
      case RoundOutcome::Locked:
        std::this_thread::sleep_for(backoff);
        backoff = std::min(backoff * 2, std::chrono::milliseconds(100));
        break;
      case RoundOutcome::Unreachable:
        throw Error(Errc::ConsensusFailed, "no majority of metadata replicas reachable for " + key);
    }
  }
  throw Error(Errc::ConsensusFailed, "gave up on " + key + " after contention");
}

management::AuthToken MetadataService::authorize(const std::string& token, const ObjectPath& path, Mode mode,
                                                 const std::vector<std::string>& extra_keys,
                                                 std::map<std::string, KeyState>& states) {
  auto auth = auth_.verify(token);
  auto keys = permission_keys(path);
  keys.insert(keys.end(), extra_keys.begin(), extra_keys.end());
  states = quorum_read(keys);
  if (!auth.has_scope(Mode::Admin) && !permits(states, path, auth.subject, mode)) {
    throw Error(Errc::PermissionDenied, auth.subject + " lacks " + std::string(mode_name(mode)) + " on " + path.str());
  }
  return auth;
}

Uuid MetadataService::create_namespace(const UserId& user, const std::string& token) {
  auto auth = auth_.verify(token);
  if (auth.subject != user && !auth.has_scope(Mode::Admin)) {
    throw Error(Errc::PermissionDenied, auth.subject + " cannot create namespace " + user);
  }
  const auto root = ObjectPath::from_segments({user});
  const auto id = Uuid::random();
  write_key(collection_key(root), [&](const KeyState& s) -> std::optional<Update> {
    if (s.exists()) throw Error(Errc::AlreadyExists, "namespace " + root.str() + " exists");
    return CreateCollection{user, true, id};
  });
  return id;
}

Uuid MetadataService::create_collection(const ObjectPath& path, const std::string& token) {
  if (path.is_root()) throw Error(Errc::InvalidParams, "use create_namespace for " + path.str());
  const auto parent = path.parent();
  std::map<std::string, KeyState> states;
  auto auth = authorize(token, parent, Mode::Write, {collection_key(parent), object_key(path)}, states);
  if (!states[collection_key(parent)].exists()) throw Error(Errc::ParentNotFound, parent.str());
  if (states[object_key(path)].exists()) throw Error(Errc::AlreadyExists, "object " + path.str() + " exists");
  const auto id = Uuid::random();
  write_key(collection_key(path), [&](const KeyState& s) -> std::optional<Update> {
    if (s.exists()) throw Error(Errc::AlreadyExists, "collection " + path.str() + " exists");
    return CreateCollection{auth.subject, false, id};
  });
  return id;
}

ObjectPath MetadataService::collection_path(const Uuid& id, const std::string& token) {
  for (const auto& [key, state] : scan_all(std::string(kCollectionPrefix))) {
    const auto* c = std::get_if<CollectionRecord>(&state.record);
    if (c == nullptr || c->id != id) continue;
    const auto path = ObjectPath::parse(key.substr(kCollectionPrefix.size()));
    std::map<std::string, KeyState> states;
    authorize(token, path, Mode::Read, {}, states);
    return path;
  }
  auth_.verify(token);
  throw Error(Errc::CollectionNotFound, "no collection with id " + id.to_string());
}

ObjectDescriptor MetadataService::register_object(const ObjectPath& path, ObjectDescriptor descriptor,
                                                  const std::string& token) {
  if (path.is_root()) throw Error(Errc::InvalidParams, "objects cannot live at a namespace root");
  const auto parent = path.parent();
  std::map<std::string, KeyState> states;
  auto auth = authorize(token, path, Mode::Write, {collection_key(parent), collection_key(path)}, states);
  if (!states[collection_key(parent)].exists()) throw Error(Errc::CollectionNotFound, parent.str());
  if (states[collection_key(path)].exists()) throw Error(Errc::AlreadyExists, "collection " + path.str() + " exists");
  validate_descriptor(descriptor);
  descriptor.path = path;
  if (descriptor.owner.empty()) descriptor.owner = auth.subject;

  ObjectDescriptor registered;
  write_key(
      object_key(path),
      [&](const KeyState& s) -> std::optional<Update> {
        registered = descriptor;
        const auto* obj = object_of(s);
        registered.version = obj ? static_cast<std::uint32_t>(obj->versions.size() + 1) : 1;
        registered.version_of = obj ? std::optional<Uuid>(obj->head().object_uuid) : std::nullopt;
        return PutVersion{registered};
      },
      descriptor.object_uuid);
  return registered;
}

ObjectDescriptor MetadataService::resolve(const ObjectPath& path, std::optional<std::uint32_t> version,
                                          const std::string& token) {
  std::map<std::string, KeyState> states;
  authorize(token, path, Mode::Read, {object_key(path)}, states);
  const auto* obj = object_of(states[object_key(path)]);
  if (!obj || obj->versions.empty()) throw Error(Errc::NotFound, path.str());
  if (!version) return obj->head();
  if (*version < 1 || *version > obj->versions.size()) {
    throw Error(Errc::NotFound, path.str() + " has no version " + std::to_string(*version));
  }
  const auto& entry = obj->versions[*version - 1];
  if (entry.expired) throw Error(Errc::VersionExpired, path.str() + " version " + std::to_string(*version));
  return entry.descriptor;
}

std::vector<VersionEntry> MetadataService::history(const ObjectPath& path, const std::string& token) {
  std::map<std::string, KeyState> states;
  authorize(token, path, Mode::Read, {object_key(path)}, states);
  const auto* obj = object_of(states[object_key(path)]);
  if (!obj) throw Error(Errc::NotFound, path.str());
  return obj->versions;
}

void MetadataService::grant(const Permission& permission, const std::string& token) {
  const auto& scope = permission.scope;
  std::map<std::string, KeyState> states;
  authorize(token, scope, Mode::Admin, {collection_key(scope), object_key(scope)}, states);
  if (!states[collection_key(scope)].exists() && !states[object_key(scope)].exists()) {
    throw Error(Errc::ScopeNotFound, scope.str());
  }
  write_key(acl_key(scope), [&](const KeyState&) -> std::optional<Update> { return Grant{permission}; });
}

bool MetadataService::check(const ObjectPath& path, const UserId& user, Mode mode, const std::string& token) {
  auth_.verify(token);
  return permits(quorum_read(permission_keys(path)), path, user, mode);
}

std::vector<ObjectDescriptor> MetadataService::evict(const ObjectPath& path, const std::string& token) {
  std::map<std::string, KeyState> states;
  authorize(token, path, Mode::Write, {}, states);
  auto base = write_key(object_key(path), [&](const KeyState& s) -> std::optional<Update> {
    if (!object_of(s)) throw Error(Errc::NotFound, path.str());
    return Evict{};
  });
  return live_versions(*object_of(*base));
}

void MetadataService::set_retention(const ObjectPath& path, std::uint32_t days, const std::string& token) {
  std::map<std::string, KeyState> states;
  authorize(token, path, Mode::Write, {}, states);
  write_key(object_key(path), [&](const KeyState& s) -> std::optional<Update> {
    if (!object_of(s)) throw Error(Errc::NotFound, path.str());
    return SetRetention{days};
  });
}

std::vector<ObjectDescriptor> MetadataService::garbage_collect(std::int64_t now_ms, const std::string& token) {
  auth_.require(token, Mode::Admin);
  std::vector<ObjectDescriptor> purged;
  for (const auto& [key, state] : scan_all(std::string(kObjectPrefix))) {
    const auto* obj = object_of(state);
    if (!obj || expired_versions(*obj, now_ms).empty()) continue;
    std::vector<ObjectDescriptor> batch;
    write_key(key, [&](const KeyState& s) -> std::optional<Update> {
      const auto* current = object_of(s);
      batch = current ? expired_versions(*current, now_ms) : std::vector<ObjectDescriptor>{};
      if (batch.empty()) return std::nullopt;
      Purge purge;
      for (const auto& d : batch) purge.versions.push_back(d.object_uuid);
      return purge;
    });
    purged.insert(purged.end(), batch.begin(), batch.end());
  }
  return purged;
}

std::vector<ObjectDescriptor> MetadataService::list(const ObjectPath& prefix, const std::string& token) {
  std::map<std::string, KeyState> states;
  authorize(token, prefix, Mode::Read, {}, states);
  std::vector<ObjectDescriptor> out;
  for (const auto& [key, state] : scan_all(object_key(prefix))) {
    const auto* obj = object_of(state);
    if (!obj || obj->versions.empty() || !prefix.contains(obj->head().path)) continue;
    auto live = live_versions(*obj);
    out.insert(out.end(), live.begin(), live.end());
  }
  return out;
}

}  // namespace dynostore::metadata
