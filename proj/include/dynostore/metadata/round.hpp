#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "dynostore/metadata/replica.hpp"

namespace dynostore::metadata {

// Vote bookkeeping for one proposal across N replicas. The first answer from
// each replica counts; duplicates are ignored.
class ProposalRound {
 public:
  enum class Decision { Pending, Commit, Abort };

  ProposalRound(Proposal proposal, std::size_t replicas)
      : proposal_(std::move(proposal)), votes_(replicas), acks_(replicas, false) {}

  static std::size_t majority(std::size_t replicas) { return replicas / 2 + 1; }

  const Proposal& proposal() const { return proposal_; }
  std::size_t size() const { return votes_.size(); }

  void on_vote(std::size_t replica, const Vote& vote) {
    if (votes_[replica]) return;
    votes_[replica] = vote;
    if (vote.last_accepted > highest_seen_) highest_seen_ = vote.last_accepted;
  }
  void on_unreachable(std::size_t replica) {
    if (!votes_[replica]) unreachable_.push_back(replica);
  }

  std::size_t accepts() const { return count([](const Vote& v) { return v.accepted(); }); }
  std::size_t rejects() const { return count([](const Vote& v) { return !v.accepted(); }); }
  bool saw(VoteReason reason) const {
    return count([reason](const Vote& v) { return v.reason == reason; }) > 0;
  }
  bool accepted_by(std::size_t replica) const { return votes_[replica] && votes_[replica]->accepted(); }
  const Timestamp& highest_seen() const { return highest_seen_; }

  // Commit once a majority accepted; abort once a majority can no longer be
  // reached.
  Decision decision() const {
    const std::size_t need = majority(size());
    if (accepts() >= need) return Decision::Commit;
    const std::size_t lost = rejects() + unreachable_.size();
    if (size() - lost < need) return Decision::Abort;
    return Decision::Pending;
  }

  void on_commit_ack(std::size_t replica) { acks_[replica] = true; }
  std::size_t commit_acks() const { return static_cast<std::size_t>(std::count(acks_.begin(), acks_.end(), true)); }
  bool committed_by_majority() const { return commit_acks() >= majority(size()); }

 private:
  template <class Pred>
  std::size_t count(Pred pred) const {
    return static_cast<std::size_t>(
        std::count_if(votes_.begin(), votes_.end(), [&](const auto& v) { return v && pred(*v); }));
  }

  Proposal proposal_;
  std::vector<std::optional<Vote>> votes_;
  std::vector<std::size_t> unreachable_;
  std::vector<bool> acks_;
  Timestamp highest_seen_;
};

}  // namespace dynostore::metadata
