#include "dynostore/metadata/transport.hpp"

#include "dynostore/domain/error.hpp"
#include "dynostore/net/http.hpp"

namespace dynostore::metadata {

Replica& LocalTransport::reachable() {
  if (down_) throw Error(Errc::Unavailable, "replica " + replica_->name() + " is down");
  return *replica_;
}

Vote LocalTransport::propose(const Proposal& p) { return reachable().on_propose(p); }
CommitResult LocalTransport::commit(const Proposal& p) { return reachable().on_commit(p); }
void LocalTransport::abort(const Proposal& p) { reachable().on_abort(p); }
std::map<std::string, KeyState> LocalTransport::read(const std::vector<std::string>& keys) {
  return reachable().read_many(keys);
}
std::map<std::string, KeyState> LocalTransport::scan(const std::string& prefix) { return reachable().scan(prefix); }
std::vector<LogEntry> LocalTransport::log_since(std::uint64_t after) { return reachable().log_since(after); }
std::vector<LogEntry> LocalTransport::log_for_key(const std::string& key) { return reachable().log_for_key(key); }
std::size_t LocalTransport::absorb(const std::vector<LogEntry>& entries) { return reachable().absorb(entries); }

HttpReplicaTransport::HttpReplicaTransport(std::string endpoint, std::string service_token)
    : endpoint_(std::move(endpoint)),
      token_(std::move(service_token)),
      pool_(std::make_unique<net::ClientPool>(endpoint_,
                                              net::ClientOptions{std::chrono::milliseconds(500),
                                                                 std::chrono::milliseconds(5000)})) {}

HttpReplicaTransport::~HttpReplicaTransport() = default;

Json HttpReplicaTransport::post(const std::string& route, const Json& body) {
  auto client = pool_->borrow();
  auto res = client->Post(route, net::auth_headers(token_), body.dump(), "application/json");
  return parse_json(net::expect_ok(res, endpoint_ + route).body);
}

Json HttpReplicaTransport::get(const std::string& route) {
  auto client = pool_->borrow();
  auto res = client->Get(route, net::auth_headers(token_));
  return parse_json(net::expect_ok(res, endpoint_ + route).body);
}

Vote HttpReplicaTransport::propose(const Proposal& p) { return post("/internal/propose", p).get<Vote>(); }

CommitResult HttpReplicaTransport::commit(const Proposal& p) {
  return parse_commit_result(post("/internal/commit", p).at("result").get<std::string>());
}

void HttpReplicaTransport::abort(const Proposal& p) { post("/internal/abort", p); }

std::map<std::string, KeyState> HttpReplicaTransport::read(const std::vector<std::string>& keys) {
  return post("/internal/read", Json{{"keys", keys}}).get<std::map<std::string, KeyState>>();
}

std::map<std::string, KeyState> HttpReplicaTransport::scan(const std::string& prefix) {
  return post("/internal/scan", Json{{"prefix", prefix}}).get<std::map<std::string, KeyState>>();
}

std::vector<LogEntry> HttpReplicaTransport::log_since(std::uint64_t after) {
  return get("/internal/log?since=" + std::to_string(after)).get<std::vector<LogEntry>>();
}

std::vector<LogEntry> HttpReplicaTransport::log_for_key(const std::string& key) {
  return post("/internal/log", Json{{"key", key}}).get<std::vector<LogEntry>>();
}

std::size_t HttpReplicaTransport::absorb(const std::vector<LogEntry>& entries) {
  return post("/internal/absorb", Json{{"entries", entries}}).at("applied").get<std::size_t>();
}

std::size_t AntiEntropy::run_once() {
  std::lock_guard lock(mu_);
  std::size_t applied = 0;
  for (std::size_t i = 0; i < peers_.size(); ++i) {
    try {
      auto entries = peers_[i]->log_since(cursors_[i]);
      if (entries.empty()) continue;
      applied += local_->absorb(entries);
      cursors_[i] = entries.back().seq;
    } catch (const Error& e) {
      if (e.code() != Errc::Unavailable) throw;
    }
  }
  return applied;
}

}  // namespace dynostore::metadata
