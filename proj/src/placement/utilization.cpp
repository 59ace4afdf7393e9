#include "dynostore/placement/utilization.hpp"

#include <algorithm>
#include <string>

#include "dynostore/domain/error.hpp"

namespace dynostore::placement {

namespace {

double used_fraction(std::uint64_t total, std::uint64_t available, std::uint64_t size) {
  if (total == 0) return 1.0;
  // total - (available - size), computed without unsigned wraparound.
  long double used = static_cast<long double>(total) - static_cast<long double>(available) + static_cast<long double>(size);
  long double u = used / static_cast<long double>(total);
  return static_cast<double>(std::clamp(u, 0.0L, 1.0L));
}

bool feasible(const ContainerState& s, std::uint64_t size) { return s.healthy && size <= s.fs_available; }

struct Scored {
  long double score;
  const ContainerState* state;
};

}  // namespace

void UtilizationWeights::validate() const {
  if (!(memory >= 0.0) || !(storage >= 0.0) || memory + storage <= 0.0) {
    throw Error(Errc::InvalidParams, "weights must be non-negative with a positive sum");
  }
}

Utilization utilization(const ContainerState& state, std::uint64_t object_size) {
  if (object_size > state.fs_available) {
    throw Error(Errc::InsufficientCapacity, "object of " + std::to_string(object_size) + " bytes exceeds " +
                                                std::to_string(state.fs_available) + " available on " +
                                                state.container_id.to_string());
  }
  return {used_fraction(state.mem_total, state.mem_available, object_size),
          used_fraction(state.fs_total, state.fs_available, object_size)};
}

Uuid select_container(std::span<const ContainerState> containers, std::uint64_t object_size,
                      const UtilizationWeights& weights) {
  weights.validate();
  // Normalised weights make the argmin independent of a common scale factor.
  const long double sum = static_cast<long double>(weights.memory) + weights.storage;
  const long double w_mem = weights.memory / sum;
  const long double w_fs = weights.storage / sum;

  const ContainerState* best = nullptr;
  long double best_score = 0;
  for (const auto& s : containers) {
    if (!feasible(s, object_size)) continue;
    auto u = utilization(s, object_size);
    long double score = w_mem * u.mem + w_fs * u.fs;
    if (best == nullptr || score < best_score || (score == best_score && s.container_id < best->container_id)) {
      best = &s;
      best_score = score;
    }
  }
  if (best == nullptr) throw Error(Errc::NoFeasibleContainer, "no healthy container can hold the object");
  return best->container_id;
}

std::vector<Uuid> select_n_containers(std::span<const ContainerState> containers, unsigned n,
                                      std::uint64_t object_size, const UtilizationWeights& weights,
                                      std::optional<unsigned> k) {
  if (n == 0) throw Error(Errc::InvalidParams, "n must be at least 1");
  const unsigned divisor = k.value_or(n);
  if (divisor == 0) throw Error(Errc::InvalidParams, "k must be at least 1");
  const std::uint64_t chunk = (object_size + divisor - 1) / divisor;

  std::vector<ContainerState> pool(containers.begin(), containers.end());
  std::vector<Uuid> chosen;
  chosen.reserve(n);
  while (chosen.size() < n) {
    Uuid pick;
    try {
      pick = select_container(pool, chunk, weights);
    } catch (const Error& e) {
      if (e.code() != Errc::NoFeasibleContainer) throw;
      throw Error(Errc::NotEnoughContainers, "Not enough containers available. need " + std::to_string(n) +
                                                 ", found " + std::to_string(chosen.size()));
    }
    chosen.push_back(pick);
    auto it = std::find_if(pool.begin(), pool.end(), [&](const auto& s) { return s.container_id == pick; });
    it->fs_available -= chunk;
    it->mem_available -= std::min(it->mem_available, chunk);
    pool.erase(it);
  }
  return chosen;
}

}  // namespace dynostore::placement
