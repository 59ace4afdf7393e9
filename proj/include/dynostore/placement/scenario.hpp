#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dynostore/domain/json.hpp"
#include "dynostore/placement/planner.hpp"

namespace dynostore::placement {

struct ContainerSpec {
  std::string name;
  std::optional<Uuid> id;
  std::uint64_t mem_total = 0;
  std::uint64_t fs_total = 0;
  std::uint64_t mem_used = 0;
  std::uint64_t fs_used = 0;
  double annual_failure_rate = 0.0;
  bool healthy = true;
};

// Planner scenario file (JSON). "containers" is either an explicit list of
// specs or a generator object {count, mem_total, fs_total, rate_min, rate_max}
// that spaces failure rates uniformly across the group.
struct PlannerScenario {
  std::vector<ContainerSpec> containers;
  double target_loss = 0.001;
  UtilizationWeights weights;
  std::uint64_t object_size = 1 << 20;
  std::uint64_t seed = 1;
};

// All parse failures surface as Error(ScenarioInvalid).
std::vector<ContainerSpec> parse_container_specs(const Json& node);
PlannerScenario parse_planner_scenario(const Json& doc);
Json load_scenario_json(const std::filesystem::path& file);

// Container ids missing from the specs are drawn from `seed`, so the same
// scenario and seed always produce the same ids.
std::vector<ContainerState> to_states(const std::vector<ContainerSpec>& specs, std::uint64_t seed);

Json plan_to_json(const ResiliencePlan& plan);

}  // namespace dynostore::placement
