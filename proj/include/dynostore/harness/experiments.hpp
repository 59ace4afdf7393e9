#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dynostore/domain/bytes.hpp"
#include "dynostore/domain/json.hpp"
#include "dynostore/harness/simnet.hpp"
#include "dynostore/management/gateway.hpp"
#include "dynostore/placement/scenario.hpp"

namespace dynostore::harness {

struct WorkloadSpec {
  enum class Distribution { Fixed, Uniform, LogUniform };

  std::size_t objects = 100;
  std::uint64_t size_min = 64 * 1024;
  std::uint64_t size_max = 64 * 1024;
  Distribution distribution = Distribution::Fixed;
};

struct FailureSpec {
  enum class Mode { WorstCase, Sampled };

  Mode mode = Mode::WorstCase;
  // Failure sets per f in sampled mode, and for f whose set count exceeds
  // max_sets in worst-case mode.
  std::size_t samples = 50;
  std::size_t max_sets = 2000;
  // Unset: every f up to the container count.
  std::optional<std::size_t> max_failures;
};

struct CodeConfig {
  std::uint16_t n = 1;
  std::uint16_t k = 1;
};

struct HarnessScenario {
  std::vector<placement::ContainerSpec> containers;
  WorkloadSpec workload;
  management::UploadMode mode = management::UploadMode::Regular;
  std::optional<std::uint16_t> n;
  std::optional<std::uint16_t> k;
  double target_loss = 0.001;
  placement::UtilizationWeights weights;
  FailureSpec failures;
  std::vector<CodeConfig> configs;
  std::vector<unsigned> channels{1, 8};
  std::chrono::milliseconds injected_latency{50};
  std::size_t exhaustive_events = 8;
  std::size_t random_schedules = 10000;
  std::size_t random_events = 40;
  std::uint64_t seed = 1;
  bool file_backed = false;
};

// Errors surface as Error(ScenarioInvalid).
HarnessScenario parse_harness_scenario(const Json& doc);
HarnessScenario load_harness_scenario(const std::filesystem::path& file);

// Object sizes for a workload. Log-uniform workloads of two or more objects
// always include both endpoints.
std::vector<std::uint64_t> workload_sizes(const WorkloadSpec& workload, std::mt19937_64& rng);
Bytes random_bytes(std::uint64_t size, std::mt19937_64& rng);

struct RetentionRow {
  std::size_t failures = 0;
  std::size_t sets = 0;
  bool exhaustive = false;
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

struct RetentionReport {
  std::size_t objects = 0;
  // "(n,k)" -> number of objects stored with that code.
  std::map<std::string, std::size_t> codes;
  // Smallest n-k over all objects.
  std::size_t tolerance = 0;
  // Largest annual loss probability over the objects' chosen containers.
  double loss_probability = 0.0;
  std::vector<RetentionRow> rows;

  const RetentionRow* row(std::size_t failures) const;
  Json to_json() const;
  std::string table() const;
};

// Uploads the workload, then for each f kills every scheduled failure set in
// turn and downloads every object, counting byte-exact retrievals.
RetentionReport run_retention(const HarnessScenario& scenario);

struct FairnessRow {
  std::string name;
  std::uint64_t chunks = 0;
  double fs_used = 0.0;
  double mem_used = 0.0;
};

struct FairnessReport {
  std::size_t objects = 0;
  std::vector<FairnessRow> rows;
  std::uint64_t min_chunks = 0;
  std::uint64_t max_chunks = 0;
  double fs_spread = 0.0;

  Json to_json() const;
  std::string table() const;
};

FairnessReport run_fairness(const HarnessScenario& scenario);

struct OverheadRow {
  CodeConfig code;
  std::uint64_t object_bytes = 0;
  std::uint64_t stored_bytes = 0;
  double ratio = 0.0;
  double expected = 0.0;
};

struct OverheadReport {
  std::vector<OverheadRow> rows;

  Json to_json() const;
  std::string table() const;
};

// One fresh cluster per code configuration; (1,1) runs in regular mode.
OverheadReport run_overhead(const HarnessScenario& scenario);

struct ParallelRow {
  unsigned channels = 1;
  double seconds = 0.0;
};

struct ParallelReport {
  std::size_t objects = 0;
  std::uint64_t object_bytes = 0;
  std::int64_t latency_ms = 0;
  std::vector<ParallelRow> rows;

  Json to_json() const;
  std::string table() const;
};

// Pushes the workload through the loopback gateway once per channel count.
ParallelReport run_parallelism(const HarnessScenario& scenario);

struct MonteCarloEstimate {
  double loss = 0.0;
  double sigma = 0.0;
  std::size_t trials = 0;
};

// Fraction of simulated years in which more than n-k of the containers fail.
MonteCarloEstimate monte_carlo_loss(std::span<const double> rates, unsigned k, std::size_t trials,
                                    std::uint64_t seed);

ConsensusReport run_consensus(const HarnessScenario& scenario);
Json consensus_to_json(const ConsensusReport& report);
std::string consensus_table(const ConsensusReport& report);

}  // namespace dynostore::harness
