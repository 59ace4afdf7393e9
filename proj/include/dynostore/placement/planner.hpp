#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dynostore/domain/types.hpp"
#include "dynostore/erasure/codec.hpp"
#include "dynostore/placement/utilization.hpp"

namespace dynostore::placement {

struct ResiliencePlan {
  erasure::ResilienceParams params;
  std::vector<Uuid> targets;
  double loss_probability = 1.0;
  bool feasible = false;
};

// Annual probability that more than n-k of the n containers fail, with
// independent per-container failure probabilities (Poisson-binomial tail,
// computed exactly by dynamic programming).
double loss_probability(std::span<const double> rates, unsigned k);

// Searches every (n,k) with 1 <= k <= n <= min(feasible containers, 255),
// placing each candidate with select_n_containers. Among candidates meeting
// `target` it picks minimal overhead n/k, then larger n-k, then smaller n.
// With no candidate meeting the target, returns the lowest-loss plan marked
// infeasible.
ResiliencePlan plan_resilience(std::span<const ContainerState> containers, std::uint64_t object_size, double target,
                               const UtilizationWeights& weights);

}  // namespace dynostore::placement
