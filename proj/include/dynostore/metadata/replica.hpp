#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "dynostore/metadata/records.hpp"

namespace dynostore::metadata {

// One update to one key. `base` is the head update id the proposer observed
// (nil for a key that has never been written); a proposal applies only on top
// of exactly that head, so at most one proposal per base ever commits.
struct Proposal {
  std::string key;
  Uuid base;
  Uuid update_id;
  Timestamp ts;
  Update update;
};

enum class VoteReason { Accepted, StaleTimestamp, BaseMismatch, Locked };
std::string_view vote_reason_name(VoteReason reason) noexcept;

struct Vote {
  VoteReason reason = VoteReason::Accepted;
  Timestamp last_accepted;  // highest timestamp this replica accepted for the key
  Uuid head;

  bool accepted() const { return reason == VoteReason::Accepted; }
};

enum class CommitResult { Applied, Duplicate, Behind };
std::string_view commit_result_name(CommitResult result) noexcept;

// Committed view of one key plus whether an accepted, unresolved proposal
// holds its lock.
struct KeyState {
  Uuid head;
  Timestamp committed;
  Record record;
  bool pending = false;

  bool exists() const { return !std::holds_alternative<std::monostate>(record); }
};

struct LogEntry {
  std::uint64_t seq = 0;
  Proposal proposal;
};

// Replica of the metadata map. Handlers are synchronous and deterministic so
// the same object serves both the live service and the simulated network.
//
// Invariants per key:
//  - accepted timestamps strictly increase;
//  - at most one accepted proposal is unresolved (the lock);
//  - committed entries form a chain, each based on its predecessor.
class Replica {
 public:
  struct Options {
    // Directory for the journal; empty keeps state in memory only.
    std::filesystem::path dir;
    // Locks older than this are ignored by later proposals. Unset: locks
    // last until commit or abort.
    std::optional<std::chrono::milliseconds> lock_lease;
    bool sync_journal = false;
    // Journal records between snapshots; 0 never snapshots. A snapshot
    // rewrites the full state to snapshot.json and truncates the journal.
    std::size_t snapshot_every = 0;
  };

  explicit Replica(std::string name);
  Replica(std::string name, Options options);
  Replica(const Replica&) = delete;
  Replica& operator=(const Replica&) = delete;

  const std::string& name() const { return name_; }

  // Deep copy of an in-memory replica (no journal); used to branch
  // simulated executions.
  std::unique_ptr<Replica> clone() const;
  // Stable text rendering of the full replica state, for state hashing.
  std::string fingerprint() const;

  Vote on_propose(const Proposal& p);
  CommitResult on_commit(const Proposal& p);
  // Releases the lock if `p` (same id and timestamp) holds it.
  void on_abort(const Proposal& p);

  // Entries with seq > `after`, in commit order.
  std::vector<LogEntry> log_since(std::uint64_t after) const;
  std::vector<LogEntry> log_for_key(const std::string& key) const;
  std::uint64_t last_seq() const;
  // Writes a snapshot now and truncates the journal; no-op without a dir.
  void snapshot();
  // Applies a peer's entries in order; returns how many were new here.
  std::size_t absorb(const std::vector<LogEntry>& entries);

  KeyState read(const std::string& key) const;
  std::map<std::string, KeyState> read_many(const std::vector<std::string>& keys) const;
  std::map<std::string, KeyState> scan(const std::string& prefix) const;

 private:
  struct Slot {
    KeyState state;
    Timestamp last_accepted;
    std::optional<Proposal> lock;
    std::chrono::steady_clock::time_point locked_at;
  };

  bool lock_live(const Slot& slot) const;
  CommitResult commit_locked(const Proposal& p, bool journal);
  void journal(const Json& record);
  void snapshot_locked();
  void restore_accept(const Proposal& p);
  void replay();

  std::string name_;
  Options options_;
  mutable std::mutex mu_;
  std::map<std::string, Slot> slots_;
  std::vector<LogEntry> log_;
  std::unordered_set<Uuid> applied_;
  // Append-only journal file; fd < 0 when the replica is in memory only.
  class Journal {
   public:
    Journal() = default;
    ~Journal() { close(); }
    Journal(const Journal&) = delete;
    Journal& operator=(const Journal&) = delete;

    void open(const std::filesystem::path& file, bool truncate);
    void close();
    bool is_open() const { return fd_ >= 0; }
    // Writes `line` and a newline; with `sync` set, returns once it is durable.
    void append(const std::string& line, bool sync);

   private:
    int fd_ = -1;
  };

  Journal journal_;
  std::size_t journaled_ = 0;  // records since the last snapshot
};

void to_json(Json& j, const Proposal& p);
void from_json(const Json& j, Proposal& p);
void to_json(Json& j, const Vote& v);
void from_json(const Json& j, Vote& v);
void to_json(Json& j, const KeyState& s);
void from_json(const Json& j, KeyState& s);
void to_json(Json& j, const LogEntry& e);
void from_json(const Json& j, LogEntry& e);
CommitResult parse_commit_result(std::string_view text);

}  // namespace dynostore::metadata
