#include "dynostore/harness/simnet.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <random>
#include <unordered_map>

#include "dynostore/domain/error.hpp"

namespace dynostore::harness {

using metadata::CommitResult;
using metadata::Proposal;
using metadata::ProposalRound;
using metadata::Timestamp;

namespace {

Uuid sim_uuid(std::uint8_t tag, std::uint8_t index) {
  std::array<std::uint8_t, 16> bytes{};
  bytes[0] = tag;
  bytes[1] = index;
  bytes[15] = 1;
  return Uuid::from_bytes(bytes);
}

// Committed everywhere before the schedule starts.
Proposal seed_proposal(const std::string& key, std::uint8_t index) {
  return Proposal{key, Uuid{}, sim_uuid(0xA0, index), Timestamp{1, 0},
                  metadata::Update{metadata::CreateCollection{"seed", false, {}}}};
}

std::vector<Uuid> key_chain(metadata::Replica& r, const std::string& key) {
  std::vector<Uuid> out;
  for (const auto& e : r.log_for_key(key)) out.push_back(e.proposal.update_id);
  return out;
}

}  // namespace

std::string SimMessage::str() const {
  switch (kind) {
    case Kind::Propose: return "propose p" + std::to_string(proposer) + "->r" + std::to_string(replica);
    case Kind::Vote:
      return "vote r" + std::to_string(replica) + "->p" + std::to_string(proposer) + " " +
             std::string(metadata::vote_reason_name(vote.reason));
    case Kind::Commit: return "commit p" + std::to_string(proposer) + "->r" + std::to_string(replica);
    case Kind::CommitAck:
      return "ack r" + std::to_string(replica) + "->p" + std::to_string(proposer) + " " +
             std::string(metadata::commit_result_name(result));
    case Kind::Abort: return "abort p" + std::to_string(proposer) + "->r" + std::to_string(replica);
  }
  return "?";
}

SimWorld::SimWorld(const SimConfig& config) : config_(config), down_(config.replicas, false) {
  if (config.replicas == 0 || config.proposers.empty())
    throw Error(Errc::ScenarioInvalid, "simulation needs replicas and proposers");
  for (std::size_t i = 0; i < config.replicas; ++i)
    replicas_.push_back(std::make_unique<metadata::Replica>("r" + std::to_string(i)));

  std::set<std::string> keys;
  for (const auto& p : config.proposers) keys.insert(p.key);
  std::map<std::string, Uuid> heads;
  std::uint8_t k = 0;
  for (const auto& key : keys) {
    const auto seed = seed_proposal(key, k++);
    for (std::size_t i = 0; i < replicas_.size(); ++i) {
      replicas_[i]->on_propose(seed);
      replicas_[i]->on_commit(seed);
      accepted_by_[seed.update_id].insert(i);
    }
    heads[key] = seed.update_id;
    successes_.emplace_back(key, seed.update_id);
  }

  for (std::size_t i = 0; i < config.proposers.size(); ++i) {
    const auto& spec = config.proposers[i];
    Proposal p{spec.key, spec.stale_base ? Uuid{} : heads[spec.key], sim_uuid(0xB0, static_cast<std::uint8_t>(i)),
               spec.ts, metadata::Update{metadata::CreateCollection{"p" + std::to_string(i), false, {}}}};
    proposers_.push_back(ProposerState{ProposalRound(std::move(p), replicas_.size()), Phase::Proposing, false,
                                       std::string(replicas_.size(), '-'), std::string(replicas_.size(), '-')});
    for (std::size_t r = 0; r < replicas_.size(); ++r)
      send(SimMessage{SimMessage::Kind::Propose, i, r, {}, CommitResult::Applied});
  }
}

SimWorld::SimWorld(const SimWorld& other)
    : config_(other.config_),
      down_(other.down_),
      proposers_(other.proposers_),
      network_(other.network_),
      accepted_by_(other.accepted_by_),
      successes_(other.successes_),
      crashes_(other.crashes_),
      trace_(other.trace_) {
  for (const auto& r : other.replicas_) replicas_.push_back(r->clone());
}

void SimWorld::send(SimMessage m) {
  const bool to_replica = m.kind == SimMessage::Kind::Propose || m.kind == SimMessage::Kind::Commit ||
                          m.kind == SimMessage::Kind::Abort;
  if (to_replica && down_[m.replica]) return;
  network_.push_back(std::move(m));
}

std::vector<SimEvent> SimWorld::enabled(bool allow_drop, bool allow_duplicate) const {
  std::vector<SimEvent> out;
  for (std::size_t i = 0; i < network_.size(); ++i) out.push_back({SimEventKind::Deliver, i});
  if (allow_drop)
    for (std::size_t i = 0; i < network_.size(); ++i) out.push_back({SimEventKind::Drop, i});
  if (allow_duplicate)
    for (std::size_t i = 0; i < network_.size(); ++i) out.push_back({SimEventKind::Duplicate, i});
  for (std::size_t r = 0; r < replicas_.size(); ++r) {
    if (down_[r])
      out.push_back({SimEventKind::Restart, r});
    else if (crashes_ < config_.max_crashes)
      out.push_back({SimEventKind::Crash, r});
  }
  return out;
}

std::string SimWorld::render(const SimEvent& e) const {
  switch (e.kind) {
    case SimEventKind::Deliver: return "deliver " + network_.at(e.target).str();
    case SimEventKind::Drop: return "drop " + network_.at(e.target).str();
    case SimEventKind::Duplicate: return "duplicate " + network_.at(e.target).str();
    case SimEventKind::Crash: return "crash r" + std::to_string(e.target);
    case SimEventKind::Restart: return "restart r" + std::to_string(e.target);
  }
  return "?";
}

void SimWorld::apply(const SimEvent& e) {
  trace_.push_back(render(e));
  switch (e.kind) {
    case SimEventKind::Deliver: {
      const SimMessage m = network_.at(e.target);
      network_.erase(network_.begin() + static_cast<std::ptrdiff_t>(e.target));
      deliver(m);
      break;
    }
    case SimEventKind::Drop:
      network_.erase(network_.begin() + static_cast<std::ptrdiff_t>(e.target));
      break;
    case SimEventKind::Duplicate:
      network_.push_back(network_.at(e.target));
      break;
    case SimEventKind::Crash: {
      down_[e.target] = true;
      ++crashes_;
      std::erase_if(network_, [&](const SimMessage& m) {
        return m.replica == e.target && (m.kind == SimMessage::Kind::Propose || m.kind == SimMessage::Kind::Commit ||
                                         m.kind == SimMessage::Kind::Abort);
      });
      break;
    }
    case SimEventKind::Restart:
      down_[e.target] = false;
      catch_up(e.target);
      break;
  }
  check();
}

void SimWorld::catch_up(std::size_t r) {
  for (std::size_t q = 0; q < replicas_.size(); ++q)
    if (q != r && !down_[q]) replicas_[r]->absorb(replicas_[q]->log_since(0));
}

void SimWorld::deliver(const SimMessage& m) {
  auto& st = proposers_.at(m.proposer);
  const Proposal& p = st.round.proposal();
  switch (m.kind) {
    case SimMessage::Kind::Propose: {
      const auto vote = replicas_[m.replica]->on_propose(p);
      if (vote.accepted()) accepted_by_[p.update_id].insert(m.replica);
      send(SimMessage{SimMessage::Kind::Vote, m.proposer, m.replica, vote, CommitResult::Applied});
      break;
    }
    case SimMessage::Kind::Vote: {
      if (st.phase != Phase::Proposing) break;
      st.round.on_vote(m.replica, m.vote);
      if (st.votes[m.replica] == '-') st.votes[m.replica] = m.vote.accepted() ? 'A' : 'R';
      auto decision = st.round.decision();
      if (config_.commit_quorum && st.round.accepts() >= *config_.commit_quorum)
        decision = ProposalRound::Decision::Commit;
      if (decision == ProposalRound::Decision::Commit) {
        st.phase = Phase::Committing;
        for (std::size_t r = 0; r < replicas_.size(); ++r)
          send(SimMessage{SimMessage::Kind::Commit, m.proposer, r, {}, CommitResult::Applied});
      } else if (decision == ProposalRound::Decision::Abort) {
        st.phase = Phase::Aborted;
        for (std::size_t r = 0; r < replicas_.size(); ++r)
          if (st.round.accepted_by(r)) send(SimMessage{SimMessage::Kind::Abort, m.proposer, r, {}, CommitResult::Applied});
      }
      break;
    }
    case SimMessage::Kind::Commit: {
      auto& replica = *replicas_[m.replica];
      auto result = replica.on_commit(p);
      if (result == CommitResult::Behind) {
        catch_up(m.replica);
        result = replica.on_commit(p);
      }
      send(SimMessage{SimMessage::Kind::CommitAck, m.proposer, m.replica, {}, result});
      break;
    }
    case SimMessage::Kind::CommitAck: {
      if (m.result == CommitResult::Behind) break;
      st.round.on_commit_ack(m.replica);
      st.acks[m.replica] = 'K';
      if (!st.succeeded && st.round.committed_by_majority()) {
        st.succeeded = true;
        successes_.emplace_back(p.key, p.update_id);
      }
      break;
    }
    case SimMessage::Kind::Abort:
      replicas_[m.replica]->on_abort(p);
      break;
  }
}

Uuid SimWorld::read_head(const std::vector<std::size_t>& subset, const std::string& key) const {
  std::optional<metadata::KeyState> best;
  for (auto r : subset) {
    auto s = replicas_.at(r)->read(key);
    if (!best || s.committed > best->committed) best = std::move(s);
  }
  return best ? best->head : Uuid{};
}

void SimWorld::fail(const std::string& what) const { throw Error(Errc::InvariantViolation, what); }

void SimWorld::check() const {
  std::set<std::string> keys;
  for (const auto& p : config_.proposers) keys.insert(p.key);

  for (const auto& key : keys) {
    std::vector<std::vector<metadata::LogEntry>> logs;
    for (const auto& r : replicas_) logs.push_back(r->log_for_key(key));

    std::map<Uuid, Uuid> by_base;
    for (std::size_t i = 0; i < logs.size(); ++i) {
      Uuid prev;
      std::optional<Timestamp> prev_ts;
      for (const auto& e : logs[i]) {
        const auto& p = e.proposal;
        if (p.base != prev) fail("r" + std::to_string(i) + " log breaks the chain at " + p.update_id.to_string());
        if (prev_ts && !(*prev_ts < p.ts)) fail("r" + std::to_string(i) + " log timestamps not increasing on " + key);
        auto acc = accepted_by_.find(p.update_id);
        if (acc == accepted_by_.end() || acc->second.size() < majority())
          fail("applied without a majority of accepts: " + p.update_id.to_string());
        auto [it, fresh] = by_base.emplace(p.base, p.update_id);
        if (!fresh && it->second != p.update_id) fail("two proposals committed on one base for " + key);
        prev = p.update_id;
        prev_ts = p.ts;
      }
    }
    for (std::size_t i = 0; i < logs.size(); ++i)
      for (std::size_t j = i + 1; j < logs.size(); ++j) {
        const std::size_t n = std::min(logs[i].size(), logs[j].size());
        for (std::size_t x = 0; x < n; ++x)
          if (logs[i][x].proposal.update_id != logs[j][x].proposal.update_id)
            fail("r" + std::to_string(i) + " and r" + std::to_string(j) + " diverge on " + key);
      }
  }

  // Every majority (down replicas keep durable state and may answer later).
  const std::size_t n = replicas_.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) < majority()) continue;
    std::vector<std::size_t> subset;
    for (std::size_t r = 0; r < n; ++r)
      if (mask & (1u << r)) subset.push_back(r);
    for (const auto& [key, id] : successes_) {
      std::optional<metadata::KeyState> best;
      std::size_t best_r = 0;
      for (auto r : subset) {
        auto s = replicas_[r]->read(key);
        if (!best || s.committed > best->committed) {
          best = std::move(s);
          best_r = r;
        }
      }
      const auto chain = key_chain(*replicas_[best_r], key);
      if (std::find(chain.begin(), chain.end(), id) == chain.end())
        fail("majority read misses a successful write " + id.to_string() + " on " + key);
    }
  }
}

void SimWorld::heal() {
  trace_.push_back("heal");
  for (std::size_t r = 0; r < replicas_.size(); ++r)
    if (down_[r]) apply({SimEventKind::Restart, r});
  const auto drain = [&] {
    while (!network_.empty()) apply({SimEventKind::Deliver, 0});
  };
  drain();
  // Undecided rounds time out and abort everywhere; commits and aborts are
  // retried until every replica has seen them.
  for (std::size_t i = 0; i < proposers_.size(); ++i) {
    auto& st = proposers_[i];
    if (st.phase == Phase::Proposing) st.phase = Phase::Aborted;
    const auto kind = st.phase == Phase::Committing ? SimMessage::Kind::Commit : SimMessage::Kind::Abort;
    for (std::size_t r = 0; r < replicas_.size(); ++r) send(SimMessage{kind, i, r, {}, CommitResult::Applied});
  }
  drain();
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t r = 0; r < replicas_.size(); ++r) catch_up(r);
  check();
  check_converged();
}

void SimWorld::check_converged() const {
  std::set<std::string> keys;
  for (const auto& p : config_.proposers) keys.insert(p.key);
  for (const auto& key : keys) {
    const auto reference = key_chain(*replicas_[0], key);
    for (std::size_t r = 0; r < replicas_.size(); ++r) {
      if (key_chain(*replicas_[r], key) != reference) fail("replicas did not converge on " + key);
      if (replicas_[r]->read(key).pending) fail("r" + std::to_string(r) + " still holds a lock on " + key);
    }
  }
  for (std::size_t i = 0; i < proposers_.size(); ++i) {
    const auto& st = proposers_[i];
    if (st.phase != Phase::Committing) continue;
    const auto& id = st.round.proposal().update_id;
    const auto chain = key_chain(*replicas_[0], st.round.proposal().key);
    if (std::find(chain.begin(), chain.end(), id) == chain.end())
      fail("decided write " + id.to_string() + " lost after heal");
  }
}

std::string SimWorld::fingerprint() const {
  std::string out;
  for (std::size_t r = 0; r < replicas_.size(); ++r) {
    out += down_[r] ? "D" : "U";
    out += replicas_[r]->fingerprint();
    out += "#";
  }
  for (const auto& st : proposers_) {
    out += std::to_string(static_cast<int>(st.phase)) + st.votes + st.acks + (st.succeeded ? "S" : "") + "/";
  }
  std::vector<std::string> msgs;
  for (const auto& m : network_) msgs.push_back(m.str());
  std::sort(msgs.begin(), msgs.end());
  for (const auto& m : msgs) out += m + ";";
  out += std::to_string(crashes_);
  return out;
}

namespace {

void record_violation(ConsensusReport& report, const SimWorld& world, const Error& e) {
  ++report.violations;
  if (report.violation.empty()) {
    report.violation = world.trace();
    report.violation_message = e.what();
  }
}

std::size_t count_successes(const SimWorld& world, std::size_t proposers) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < proposers; ++i) n += world.succeeded(i) ? 1 : 0;
  return n;
}

}  // namespace

ConsensusReport explore_exhaustive(const SimConfig& config, std::size_t max_events) {
  ConsensusReport report;
  report.configurations = 1;
  std::unordered_map<std::string, std::size_t> memo;

  std::function<void(const SimWorld&, std::size_t)> visit = [&](const SimWorld& world, std::size_t remaining) {
    const auto fp = world.fingerprint();
    auto [it, fresh] = memo.emplace(fp, remaining);
    if (!fresh) {
      if (it->second >= remaining) return;
      it->second = remaining;
    }
    ++report.exhaustive_states;

    SimWorld healed(world);
    try {
      healed.heal();
      report.committed_writes += count_successes(healed, config.proposers.size());
    } catch (const Error& e) {
      if (e.code() != Errc::InvariantViolation) throw;
      record_violation(report, healed, e);
    }

    const auto events = world.enabled(true, false);
    if (remaining == 0 || events.empty()) {
      ++report.exhaustive_leaves;
      return;
    }
    for (const auto& e : events) {
      SimWorld next(world);
      try {
        next.apply(e);
      } catch (const Error& err) {
        if (err.code() != Errc::InvariantViolation) throw;
        record_violation(report, next, err);
        continue;
      }
      visit(next, remaining - 1);
    }
  };

  SimWorld root(config);
  visit(root, max_events);
  return report;
}

ConsensusReport explore_random(std::size_t schedules, std::size_t max_events, std::uint64_t seed) {
  ConsensusReport report;
  std::mt19937_64 rng(seed);
  const auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  const auto chance = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; };

  for (std::size_t s = 0; s < schedules; ++s) {
    SimConfig config;
    config.replicas = chance(0.25) ? 5 : 3;
    config.max_crashes = 1 + pick(2);
    const std::size_t proposers = 2 + pick(2);
    for (std::size_t i = 0; i < proposers; ++i) {
      SimProposer p;
      p.id = static_cast<std::uint32_t>(i + 1);
      p.ts = Timestamp{100 + static_cast<std::int64_t>(pick(3)), p.id};
      p.key = chance(0.3) ? "o:/u/c/y" : "o:/u/c/x";
      p.stale_base = chance(0.15);
      config.proposers.push_back(p);
    }
    ++report.configurations;
    ++report.random_schedules;

    SimWorld world(config);
    try {
      for (std::size_t step = 0; step < max_events; ++step) {
        const bool mutate = chance(0.25);
        const auto events = world.enabled(mutate, mutate);
        if (events.empty()) break;
        std::vector<SimEvent> delivers;
        for (const auto& e : events)
          if (e.kind == SimEventKind::Deliver) delivers.push_back(e);
        const auto& e = (!mutate && !delivers.empty()) ? delivers[pick(delivers.size())] : events[pick(events.size())];
        world.apply(e);
        ++report.random_events;
      }
      world.heal();
      report.committed_writes += count_successes(world, config.proposers.size());
    } catch (const Error& e) {
      if (e.code() != Errc::InvariantViolation) throw;
      record_violation(report, world, e);
    }
  }
  return report;
}

std::vector<SimConfig> standard_configurations() {
  std::vector<SimConfig> out;
  // Two writers racing on one base, distinct clocks.
  out.push_back(SimConfig{3, {{1, {100, 1}}, {2, {101, 2}}}, 1, std::nullopt});
  // Same wall clock; the proposer id breaks the tie.
  out.push_back(SimConfig{3, {{1, {100, 1}}, {2, {100, 2}}}, 1, std::nullopt});
  // A writer that read nothing races one that read the head.
  out.push_back(SimConfig{3, {{1, {100, 1}, "o:/u/c/x", true}, {2, {100, 2}}}, 1, std::nullopt});
  // Independent keys do not block each other.
  out.push_back(SimConfig{3, {{1, {100, 1}, "o:/u/c/x"}, {2, {100, 2}, "o:/u/c/y"}}, 1, std::nullopt});
  return out;
}

ConsensusReport run_consensus_schedules(std::size_t exhaustive_events, std::size_t random_schedules,
                                        std::size_t random_events, std::uint64_t seed) {
  ConsensusReport total;
  const auto merge = [&](const ConsensusReport& r) {
    total.configurations += r.configurations;
    total.exhaustive_states += r.exhaustive_states;
    total.exhaustive_leaves += r.exhaustive_leaves;
    total.random_schedules += r.random_schedules;
    total.random_events += r.random_events;
    total.committed_writes += r.committed_writes;
    total.violations += r.violations;
    if (total.violation.empty() && !r.violation.empty()) {
      total.violation = r.violation;
      total.violation_message = r.violation_message;
    }
  };
  for (const auto& config : standard_configurations()) merge(explore_exhaustive(config, exhaustive_events));
  if (random_schedules > 0) merge(explore_random(random_schedules, random_events, seed));
  return total;
}

}  // namespace dynostore::harness
