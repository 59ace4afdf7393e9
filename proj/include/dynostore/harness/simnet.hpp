#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dynostore/metadata/replica.hpp"
#include "dynostore/metadata/round.hpp"

namespace dynostore::harness {

// One concurrent writer in a simulated execution.
struct SimProposer {
  std::uint32_t id = 1;
  metadata::Timestamp ts;
  std::string key = "o:/u/c/x";
  // Propose against a base that was never the head (nil).
  bool stale_base = false;
};

struct SimConfig {
  std::size_t replicas = 3;
  std::vector<SimProposer> proposers;
  std::size_t max_crashes = 1;
  // Accepts a proposer waits for before committing; unset means a majority.
  // Smaller values break the protocol on purpose to exercise the checker.
  std::optional<std::size_t> commit_quorum;
};

enum class SimEventKind { Deliver, Drop, Duplicate, Crash, Restart };

struct SimEvent {
  SimEventKind kind = SimEventKind::Deliver;
  // Message index for Deliver/Drop/Duplicate, replica for Crash/Restart.
  std::size_t target = 0;
};

struct SimMessage {
  enum class Kind { Propose, Vote, Commit, CommitAck, Abort };
  Kind kind = Kind::Propose;
  std::size_t proposer = 0;
  std::size_t replica = 0;
  metadata::Vote vote;
  metadata::CommitResult result = metadata::CommitResult::Applied;

  std::string str() const;
};

// Replicas, proposers and in-flight messages of one simulated execution.
// Replica state is durable by construction (every handler persists before it
// replies), so a crash loses exactly the messages addressed to the replica
// while it is down; on restart it pulls its peers' logs.
//
// Safety invariants, checked after every step (InvariantViolation):
//  - a proposal is applied anywhere only after a majority accepted it;
//  - per key, every replica log is a chain with strictly increasing
//    timestamps, and any two replica logs are prefix-related;
//  - at most one proposal per (key, base) is ever applied;
//  - once a write is reported successful, every majority read returns it or
//    a later version.
// heal() additionally requires convergence: identical logs, no held locks.
class SimWorld {
 public:
  explicit SimWorld(const SimConfig& config);
  SimWorld(const SimWorld& other);
  SimWorld& operator=(const SimWorld&) = delete;

  std::vector<SimEvent> enabled(bool allow_drop, bool allow_duplicate) const;
  void apply(const SimEvent& event);
  // Restarts everything, retries undecided rounds, delivers to quiescence and
  // runs a full anti-entropy pass.
  void heal();
  void check() const;
  void check_converged() const;

  std::string fingerprint() const;
  const std::vector<std::string>& trace() const { return trace_; }
  std::size_t in_flight() const { return network_.size(); }
  bool succeeded(std::size_t proposer) const { return proposers_.at(proposer).succeeded; }
  const metadata::Proposal& proposal(std::size_t proposer) const { return proposers_.at(proposer).round.proposal(); }
  metadata::Replica& replica(std::size_t i) { return *replicas_.at(i); }
  bool down(std::size_t i) const { return down_.at(i); }
  // Highest-committed head of `key` over the given replicas.
  Uuid read_head(const std::vector<std::size_t>& replicas, const std::string& key) const;

 private:
  enum class Phase { Proposing, Committing, Aborted };
  struct ProposerState {
    metadata::ProposalRound round;
    Phase phase = Phase::Proposing;
    bool succeeded = false;
    std::string votes;  // per replica: '-', 'A' accepted, 'R' rejected
    std::string acks;   // per replica: '-', 'K' acknowledged
  };

  void send(SimMessage m);
  void deliver(const SimMessage& m);
  void catch_up(std::size_t replica);
  std::string render(const SimEvent& event) const;
  [[noreturn]] void fail(const std::string& what) const;

  std::size_t majority() const { return replicas_.size() / 2 + 1; }

  SimConfig config_;
  std::vector<std::unique_ptr<metadata::Replica>> replicas_;
  std::vector<bool> down_;
  std::vector<ProposerState> proposers_;
  std::vector<SimMessage> network_;
  std::map<Uuid, std::set<std::size_t>> accepted_by_;
  // Writes reported successful, with the key they wrote.
  std::vector<std::pair<std::string, Uuid>> successes_;
  std::size_t crashes_ = 0;
  std::vector<std::string> trace_;
};

struct ConsensusReport {
  std::size_t configurations = 0;
  std::size_t exhaustive_states = 0;
  std::size_t exhaustive_leaves = 0;
  std::size_t random_schedules = 0;
  std::size_t random_events = 0;
  std::size_t committed_writes = 0;
  std::size_t violations = 0;
  // Replayable event log of the first violation.
  std::vector<std::string> violation;
  std::string violation_message;
};

// Every schedule of at most `max_events` events (deliver, drop, crash,
// restart), memoized on world state; every explored state is also healed.
ConsensusReport explore_exhaustive(const SimConfig& config, std::size_t max_events);
// Random configurations and schedules that also duplicate messages.
ConsensusReport explore_random(std::size_t schedules, std::size_t max_events, std::uint64_t seed);
// The standard configurations explored exhaustively, plus random schedules.
ConsensusReport run_consensus_schedules(std::size_t exhaustive_events, std::size_t random_schedules,
                                        std::size_t random_events, std::uint64_t seed);
std::vector<SimConfig> standard_configurations();

}  // namespace dynostore::harness
