#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dynostore/domain/types.hpp"

namespace dynostore::placement {

// Relative importance of memory vs storage pressure in the selection score.
struct UtilizationWeights {
  double memory = 0.5;
  double storage = 0.5;

  // Both non-negative and not both zero, else Error(InvalidParams).
  void validate() const;
};

struct Utilization {
  double mem = 0.0;
  double fs = 0.0;
};

// Post-placement used fraction of each resource,
//   U = (total - (available - |o|)) / total, clamped to [0,1].
// Throws InsufficientCapacity when |o| exceeds fs_available.
Utilization utilization(const ContainerState& state, std::uint64_t object_size);

// Healthy container with the lowest weighted utilization after placing
// `object_size` bytes; ties go to the smallest container id.
Uuid select_container(std::span<const ContainerState> containers, std::uint64_t object_size,
                      const UtilizationWeights& weights);

// n distinct containers chosen by repeated select_container, charging each pick
// with one chunk (ceil(size/k) when k is known, else ceil(size/n)).
// Throws NotEnoughContainers when fewer than n are feasible.
std::vector<Uuid> select_n_containers(std::span<const ContainerState> containers, unsigned n,
                                      std::uint64_t object_size, const UtilizationWeights& weights,
                                      std::optional<unsigned> k = std::nullopt);

}  // namespace dynostore::placement
