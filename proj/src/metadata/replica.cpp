#include "dynostore/metadata/replica.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>

#include "dynostore/domain/error.hpp"

namespace dynostore::metadata {

std::string_view vote_reason_name(VoteReason reason) noexcept {
  switch (reason) {
    case VoteReason::Accepted: return "Accepted";
    case VoteReason::StaleTimestamp: return "StaleTimestamp";
    case VoteReason::BaseMismatch: return "BaseMismatch";
    case VoteReason::Locked: return "Locked";
  }
  return "Accepted";
}

std::string_view commit_result_name(CommitResult result) noexcept {
  switch (result) {
    case CommitResult::Applied: return "Applied";
    case CommitResult::Duplicate: return "Duplicate";
    case CommitResult::Behind: return "Behind";
  }
  return "Applied";
}

CommitResult parse_commit_result(std::string_view text) {
  if (text == "Applied") return CommitResult::Applied;
  if (text == "Duplicate") return CommitResult::Duplicate;
  if (text == "Behind") return CommitResult::Behind;
  throw Error(Errc::BadRequest, "unknown commit result '" + std::string(text) + "'");
}

Replica::Replica(std::string name) : Replica(std::move(name), Options{}) {}

Replica::Replica(std::string name, Options options) : name_(std::move(name)), options_(std::move(options)) {
  if (options_.dir.empty()) return;
  std::filesystem::create_directories(options_.dir);
  replay();
  journal_.open(options_.dir / "journal.jsonl", false);
}

std::unique_ptr<Replica> Replica::clone() const {
  std::lock_guard lock(mu_);
  if (journal_.is_open()) throw Error(Errc::InvalidParams, "cannot clone a journaled replica");
  auto copy = std::make_unique<Replica>(name_, options_);
  copy->slots_ = slots_;
  copy->log_ = log_;
  copy->applied_ = applied_;
  return copy;
}

std::string Replica::fingerprint() const {
  std::lock_guard lock(mu_);
  std::string out;
  for (const auto& [key, slot] : slots_) {
    out += key + "|" + slot.state.head.to_string() + "|" + std::to_string(slot.last_accepted.wall_ms) + "." +
           std::to_string(slot.last_accepted.proposer) + "|";
    out += slot.lock ? slot.lock->update_id.to_string() + "@" + std::to_string(slot.lock->ts.wall_ms) + "." +
                           std::to_string(slot.lock->ts.proposer)
                     : "-";
    out += ";";
  }
  for (const auto& e : log_) out += e.proposal.update_id.to_string().substr(0, 8) + ",";
  return out;
}

bool Replica::lock_live(const Slot& slot) const {
  if (!slot.lock) return false;
  if (!options_.lock_lease) return true;
  return std::chrono::steady_clock::now() - slot.locked_at < *options_.lock_lease;
}

Vote Replica::on_propose(const Proposal& p) {
  std::lock_guard lock(mu_);
  auto& slot = slots_[p.key];
  Vote vote{VoteReason::Accepted, slot.last_accepted, slot.state.head};
  // Redelivery of the proposal already holding the lock is answered again.
  if (slot.lock && slot.lock->update_id == p.update_id && slot.lock->ts == p.ts) return vote;
  if (p.ts <= slot.last_accepted) {
    vote.reason = VoteReason::StaleTimestamp;
  } else if (lock_live(slot)) {
    vote.reason = VoteReason::Locked;
  } else if (p.base != slot.state.head) {
    vote.reason = VoteReason::BaseMismatch;
  }
  if (!vote.accepted()) return vote;

  slot.last_accepted = p.ts;
  slot.lock = p;
  slot.locked_at = std::chrono::steady_clock::now();
  slot.state.pending = true;
  journal(Json{{"t", "accept"}, {"p", p}});
  vote.last_accepted = p.ts;
  return vote;
}

CommitResult Replica::on_commit(const Proposal& p) {
  std::lock_guard lock(mu_);
  return commit_locked(p, true);
}

CommitResult Replica::commit_locked(const Proposal& p, bool write_journal) {
  if (applied_.contains(p.update_id)) return CommitResult::Duplicate;
  auto& slot = slots_[p.key];
  if (p.base != slot.state.head) return CommitResult::Behind;

  apply_update(slot.state.record, p.update);
  slot.state.head = p.update_id;
  slot.state.committed = p.ts;
  slot.last_accepted = std::max(slot.last_accepted, p.ts);
  // Any lock at or below this timestamp belongs to a proposal that can no
  // longer commit on this base.
  if (slot.lock && slot.lock->ts <= p.ts) slot.lock.reset();
  slot.state.pending = slot.lock.has_value();
  applied_.insert(p.update_id);
  const std::uint64_t seq = log_.empty() ? 1 : log_.back().seq + 1;
  log_.push_back(LogEntry{seq, p});
  if (write_journal) journal(Json{{"t", "commit"}, {"p", p}});
  return CommitResult::Applied;
}

void Replica::on_abort(const Proposal& p) {
  std::lock_guard lock(mu_);
  auto it = slots_.find(p.key);
  if (it == slots_.end() || !it->second.lock || it->second.lock->update_id != p.update_id ||
      it->second.lock->ts != p.ts) {
    return;
  }
  it->second.lock.reset();
  it->second.state.pending = false;
  journal(Json{{"t", "abort"}, {"key", p.key}, {"id", p.update_id}, {"ts", p.ts}});
}

std::vector<LogEntry> Replica::log_since(std::uint64_t after) const {
  std::lock_guard lock(mu_);
  auto it = std::upper_bound(log_.begin(), log_.end(), after,
                             [](std::uint64_t seq, const LogEntry& e) { return seq < e.seq; });
  return {it, log_.end()};
}

std::vector<LogEntry> Replica::log_for_key(const std::string& key) const {
  std::lock_guard lock(mu_);
  std::vector<LogEntry> out;
  for (const auto& e : log_) {
    if (e.proposal.key == key) out.push_back(e);
  }
  return out;
}

std::uint64_t Replica::last_seq() const {
  std::lock_guard lock(mu_);
  return log_.empty() ? 0 : log_.back().seq;
}

std::size_t Replica::absorb(const std::vector<LogEntry>& entries) {
  std::lock_guard lock(mu_);
  std::size_t applied = 0;
  for (const auto& e : entries) {
    if (commit_locked(e.proposal, true) == CommitResult::Applied) ++applied;
  }
  return applied;
}

KeyState Replica::read(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = slots_.find(key);
  if (it == slots_.end()) return {};
  KeyState s = it->second.state;
  s.pending = lock_live(it->second);
  return s;
}

std::map<std::string, KeyState> Replica::read_many(const std::vector<std::string>& keys) const {
  std::map<std::string, KeyState> out;
  for (const auto& key : keys) out[key] = read(key);
  return out;
}

std::map<std::string, KeyState> Replica::scan(const std::string& prefix) const {
  std::lock_guard lock(mu_);
  std::map<std::string, KeyState> out;
  for (auto it = slots_.lower_bound(prefix); it != slots_.end() && it->first.starts_with(prefix); ++it) {
    if (!it->second.state.exists() && !lock_live(it->second)) continue;
    KeyState s = it->second.state;
    s.pending = lock_live(it->second);
    out.emplace(it->first, std::move(s));
  }
  return out;
}

void Replica::journal(const Json& record) {
  if (!journal_.is_open()) return;
  journal_.append(record.dump(), options_.sync_journal);
  if (options_.snapshot_every > 0 && ++journaled_ >= options_.snapshot_every) snapshot_locked();
}

void Replica::Journal::open(const std::filesystem::path& file, bool truncate) {
  close();
  fd_ = ::open(file.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC | (truncate ? O_TRUNC : 0), 0644);
  if (fd_ < 0) throw Error(Errc::BackendFailure, "cannot open " + file.string() + ": " + std::strerror(errno));
}

void Replica::Journal::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Replica::Journal::append(const std::string& line, bool sync) {
  const std::string record = line + '\n';
  std::size_t done = 0;
  while (done < record.size()) {
    const auto n = ::write(fd_, record.data() + done, record.size() - done);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(Errc::BackendFailure, std::string("journal write failed: ") + std::strerror(errno));
    done += static_cast<std::size_t>(n);
  }
  if (sync && ::fdatasync(fd_) != 0) throw Error(Errc::BackendFailure, std::string("journal sync failed: ") + std::strerror(errno));
}

void Replica::snapshot() {
  std::lock_guard lock(mu_);
  snapshot_locked();
}

// The snapshot lands by rename before the journal is truncated, so a crash in
// between replays journal records the snapshot already holds; every record
// type is idempotent on replay.
void Replica::snapshot_locked() {
  if (!journal_.is_open()) return;
  Json slots = Json::array();
  for (const auto& [key, slot] : slots_) {
    if (!slot.lock && slot.last_accepted == slot.state.committed) continue;
    slots.push_back(Json{{"key", key}, {"last_accepted", slot.last_accepted},
                         {"lock", slot.lock ? Json(*slot.lock) : Json(nullptr)}});
  }
  const Json doc{{"log", log_}, {"slots", std::move(slots)}};
  const auto tmp = options_.dir / "snapshot.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << doc.dump();
    out.flush();
    if (!out) throw Error(Errc::BackendFailure, "snapshot write failed");
  }
  if (options_.sync_journal) {
    // ofstream cannot fsync; reopen the finished file to make it durable.
    const int fd = ::open(tmp.c_str(), O_RDONLY | O_CLOEXEC);
    const bool synced = fd >= 0 && ::fsync(fd) == 0;
    if (fd >= 0) ::close(fd);
    if (!synced) throw Error(Errc::BackendFailure, "snapshot sync failed");
  }
  std::filesystem::rename(tmp, options_.dir / "snapshot.json");
  journal_.open(options_.dir / "journal.jsonl", true);
  journaled_ = 0;
}

void Replica::restore_accept(const Proposal& p) {
  auto& slot = slots_[p.key];
  slot.last_accepted = std::max(slot.last_accepted, p.ts);
  if (!applied_.contains(p.update_id)) {
    slot.lock = p;
    slot.locked_at = std::chrono::steady_clock::now();
    slot.state.pending = true;
  }
}

void Replica::replay() {
  if (std::ifstream snap(options_.dir / "snapshot.json"); snap) {
    const auto doc = Json::parse(snap);
    for (const auto& e : doc.at("log")) commit_locked(e.get<LogEntry>().proposal, false);
    for (const auto& s : doc.at("slots")) {
      auto& slot = slots_[s.at("key").get<std::string>()];
      slot.last_accepted = std::max(slot.last_accepted, s.at("last_accepted").get<Timestamp>());
      if (!s.at("lock").is_null()) restore_accept(s.at("lock").get<Proposal>());
    }
  }
  std::ifstream in(options_.dir / "journal.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const Json::exception&) {
      break;  // torn final write
    }
    const auto type = rec.at("t").get<std::string>();
    if (type == "commit") {
      commit_locked(rec.at("p").get<Proposal>(), false);
    } else if (type == "accept") {
      restore_accept(rec.at("p").get<Proposal>());
    } else if (type == "abort") {
      auto it = slots_.find(rec.at("key").get<std::string>());
      if (it != slots_.end() && it->second.lock && it->second.lock->update_id == rec.at("id").get<Uuid>() &&
          it->second.lock->ts == rec.at("ts").get<Timestamp>()) {
        it->second.lock.reset();
        it->second.state.pending = false;
      }
    }
  }
}

void to_json(Json& j, const Proposal& p) {
  j = Json{{"key", p.key}, {"base", p.base}, {"id", p.update_id}, {"ts", p.ts}, {"update", p.update}};
}

void from_json(const Json& j, Proposal& p) {
  p.key = j.at("key").get<std::string>();
  p.base = j.at("base").get<Uuid>();
  p.update_id = j.at("id").get<Uuid>();
  p.ts = j.at("ts").get<Timestamp>();
  p.update = j.at("update").get<Update>();
}

void to_json(Json& j, const Vote& v) {
  j = Json{{"reason", vote_reason_name(v.reason)}, {"last_accepted", v.last_accepted}, {"head", v.head}};
}

void from_json(const Json& j, Vote& v) {
  const auto reason = j.at("reason").get<std::string>();
  if (reason == "Accepted") v.reason = VoteReason::Accepted;
  else if (reason == "StaleTimestamp") v.reason = VoteReason::StaleTimestamp;
  else if (reason == "BaseMismatch") v.reason = VoteReason::BaseMismatch;
  else if (reason == "Locked") v.reason = VoteReason::Locked;
  else throw Error(Errc::BadRequest, "unknown vote reason '" + reason + "'");
  v.last_accepted = j.at("last_accepted").get<Timestamp>();
  v.head = j.at("head").get<Uuid>();
}

void to_json(Json& j, const KeyState& s) {
  j = Json{{"head", s.head}, {"committed", s.committed}, {"record", s.record}, {"pending", s.pending}};
}

void from_json(const Json& j, KeyState& s) {
  s.head = j.at("head").get<Uuid>();
  s.committed = j.at("committed").get<Timestamp>();
  s.record = j.at("record").get<Record>();
  s.pending = j.value("pending", false);
}

void to_json(Json& j, const LogEntry& e) { j = Json{{"seq", e.seq}, {"p", e.proposal}}; }

void from_json(const Json& j, LogEntry& e) {
  e.seq = j.at("seq").get<std::uint64_t>();
  e.proposal = j.at("p").get<Proposal>();
}

}  // namespace dynostore::metadata
