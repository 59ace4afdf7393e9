#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "dynostore/harness/cluster.hpp"
#include "dynostore/harness/experiments.hpp"
#include "dynostore/harness/faults.hpp"
#include "dynostore/harness/report.hpp"
#include "dynostore/placement/planner.hpp"
#include "test_support.hpp"

namespace dynostore::harness {
namespace {

using testing::random_payload;
using testing::TempDir;

const std::filesystem::path kScenarios = std::filesystem::path(DYNOSTORE_SOURCE_DIR) / "scenarios";

TEST(Report, TableAlignsNumbersRight) {
  TextTable t({"name", "value"});
  t.add_row({"alpha", "1.5"});
  t.add_row({"b", "100.25"});
  std::istringstream lines(t.render());
  std::vector<std::string> out;
  for (std::string line; std::getline(lines, line);) out.push_back(line);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[1].find_first_not_of("- "), std::string::npos);
  EXPECT_EQ(out[2].size(), out[3].size());
  EXPECT_EQ(out[2].substr(out[2].size() - 3), "1.5");
  EXPECT_EQ(out[2].rfind("alpha", 0), 0u);
}

TEST(Report, NumberFormatting) {
  EXPECT_EQ(fixed(1.23456, 2), "1.23");
  EXPECT_EQ(percent(0.16789), "16.79%");
  EXPECT_EQ(percent(1.0, 0), "100%");
}

TEST(Report, JsonReportsAreStable) {
  TempDir dir;
  const Json doc{{"b", 1}, {"a", {1, 2}}};
  write_json_report(dir.path() / "x.json", doc);
  write_json_report(dir.path() / "y.json", doc);
  std::ifstream x(dir.path() / "x.json"), y(dir.path() / "y.json");
  const std::string sx((std::istreambuf_iterator<char>(x)), {}), sy((std::istreambuf_iterator<char>(y)), {});
  EXPECT_EQ(sx, sy);
  EXPECT_EQ(sx.back(), '\n');
  EXPECT_EQ(Json::parse(sx), doc);
}

TEST(Scenario, ShippedScenariosParse) {
  std::size_t parsed = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
    if (entry.path().filename() == "plan.json") continue;
    EXPECT_NO_THROW(load_harness_scenario(entry.path())) << entry.path();
    ++parsed;
  }
  EXPECT_GE(parsed, 6u);
}

TEST(Scenario, DefaultsAndOverrides) {
  const auto sc = parse_harness_scenario(Json::parse(R"({
    "containers": {"count": 4, "mem_total": 1000, "fs_total": 2000},
    "workload": {"objects": 7, "size_min": 1, "size_max": 50, "distribution": "uniform"},
    "mode": "resilient", "n": 4, "k": 2,
    "failures": {"mode": "sampled", "samples": 9},
    "parallel": {"channels": [2, 4], "latency_ms": 5},
    "consensus": {"exhaustive_events": 3},
    "seed": 99})"));
  EXPECT_EQ(sc.containers.size(), 4u);
  EXPECT_EQ(sc.workload.objects, 7u);
  EXPECT_EQ(sc.workload.distribution, WorkloadSpec::Distribution::Uniform);
  EXPECT_EQ(sc.mode, management::UploadMode::Resilient);
  EXPECT_EQ(*sc.n, 4);
  EXPECT_EQ(sc.failures.mode, FailureSpec::Mode::Sampled);
  EXPECT_EQ(sc.failures.samples, 9u);
  EXPECT_EQ(sc.channels, (std::vector<unsigned>{2, 4}));
  EXPECT_EQ(sc.injected_latency.count(), 5);
  EXPECT_EQ(sc.exhaustive_events, 3u);
  EXPECT_EQ(sc.random_schedules, 10000u);
  EXPECT_EQ(sc.seed, 99u);
}

TEST(Scenario, InvalidDocumentsAreRejected) {
  const std::string base = R"("containers": {"count": 3, "mem_total": 10, "fs_total": 10})";
  for (const std::string body :
       {std::string("[]"), std::string("{}"), "{" + base + R"(, "n": 3})",
        "{" + base + R"(, "n": 2, "k": 3})", "{" + base + R"(, "mode": "fast"})",
        "{" + base + R"(, "failures": {"mode": "all"}})", "{" + base + R"(, "target_loss": 0})",
        "{" + base + R"(, "workload": {"size_min": 10, "size_max": 5}})",
        "{" + base + R"(, "workload": {"size_min": 0, "size_max": 5, "distribution": "log_uniform"}})",
        "{" + base + R"(, "configs": [[2, 3]]})", "{" + base + R"(, "parallel": {"channels": [0]}})"}) {
    EXPECT_ERRC(parse_harness_scenario(Json::parse(body)), Errc::ScenarioInvalid) << body;
  }
  EXPECT_ERRC(load_harness_scenario("/nonexistent/scenario.json"), Errc::ScenarioInvalid);
}

TEST(Workload, SizesStayInRangeAndRepeatPerSeed) {
  WorkloadSpec w{500, 1, 10'000'000, WorkloadSpec::Distribution::LogUniform};
  std::mt19937_64 a(5), b(5);
  const auto sa = workload_sizes(w, a), sb = workload_sizes(w, b);
  ASSERT_EQ(sa.size(), 500u);
  EXPECT_EQ(sa, sb);
  EXPECT_EQ(sa[0], 1u);
  EXPECT_EQ(sa[1], 10'000'000u);
  std::size_t small = 0;
  for (auto s : sa) {
    EXPECT_GE(s, 1u);
    EXPECT_LE(s, 10'000'000u);
    small += s < 3163;  // below the geometric midpoint
  }
  EXPECT_NEAR(static_cast<double>(small) / 500.0, 0.5, 0.1);
  w.distribution = WorkloadSpec::Distribution::Fixed;
  w.size_min = 7;
  for (auto s : workload_sizes(w, a)) EXPECT_EQ(s, 7u);
  std::mt19937_64 r1(3), r2(3);
  EXPECT_EQ(random_bytes(1000, r1), random_bytes(1000, r2));
}

TEST(MonteCarlo, AgreesWithTheExactLoss) {
  const std::vector<double> rates{0.05, 0.1, 0.2, 0.02, 0.3, 0.15};
  const double exact = placement::loss_probability(rates, 4);
  const auto mc = monte_carlo_loss(rates, 4, 200000, 17);
  EXPECT_EQ(mc.trials, 200000u);
  EXPECT_GT(mc.sigma, 0.0);
  EXPECT_LE(std::abs(mc.loss - exact), 3.0 * mc.sigma);
  const auto again = monte_carlo_loss(rates, 4, 200000, 17);
  EXPECT_EQ(again.loss, mc.loss);
}

TEST(Faults, KillSwitchFiresOnTheNthWrite) {
  KillSwitch ks;
  EXPECT_FALSE(ks.on_write());
  ks.arm(3, true);
  EXPECT_FALSE(ks.on_write());
  EXPECT_FALSE(ks.on_write());
  EXPECT_TRUE(ks.on_write());
  EXPECT_TRUE(ks.fired());
  EXPECT_TRUE(ks.persist());
  EXPECT_FALSE(ks.on_write());
  ks.arm(1, false);
  ks.disarm();
  EXPECT_FALSE(ks.on_write());
}

ClusterOptions small_cluster(std::size_t count, bool file_backed = false) {
  ClusterOptions o;
  for (std::size_t i = 0; i < count; ++i) {
    placement::ContainerSpec s;
    s.name = "c" + std::to_string(i);
    s.mem_total = 16ull << 20;
    s.fs_total = 64ull << 20;
    s.annual_failure_rate = 0.05;
    o.containers.push_back(s);
  }
  o.file_backed = file_backed;
  return o;
}

TEST(Faults, DownStoreFailsEveryCallAndPersistedKillKeepsTheChunk) {
  Cluster cluster(small_cluster(1));
  auto& store = cluster.fault(0);
  const auto token = cluster.admin_token();
  const ChunkKey key{Uuid::random(), 0};
  cluster.kill(0);
  EXPECT_ERRC(store.put_chunk(key, random_payload(10, 1), token), Errc::Unavailable);
  EXPECT_ERRC(store.status(), Errc::Unavailable);
  cluster.revive(0);
  cluster.kill_switch().arm(1, true);
  EXPECT_ERRC(store.put_chunk(key, random_payload(10, 1), token), Errc::Unavailable);
  EXPECT_TRUE(store.down());
  cluster.revive(0);
  EXPECT_TRUE(store.exists_chunk(key, token));
  cluster.kill_switch().arm(1, false);
  const ChunkKey other{Uuid::random(), 0};
  EXPECT_ERRC(store.put_chunk(other, random_payload(10, 1), token), Errc::Unavailable);
  cluster.revive(0);
  EXPECT_FALSE(store.exists_chunk(other, token));
}

TEST(Faults, CorruptionIsVisibleThroughTheCache) {
  Cluster cluster(small_cluster(1));
  const auto token = cluster.admin_token();
  const ChunkKey key{Uuid::random(), 0};
  const auto bytes = random_payload(500, 2);
  cluster.node(0).put_chunk(key, bytes, token);
  EXPECT_EQ(cluster.node(0).get_chunk(key, token), bytes);
  corrupt_chunk(cluster.node(0), key, 10, 0x01);
  auto damaged = cluster.node(0).get_chunk(key, token);
  EXPECT_EQ(damaged[10], bytes[10] ^ 0x01);
  damaged[10] ^= 0x01;
  EXPECT_EQ(damaged, bytes);
}

TEST(Cluster, SweepFindsOrphansAndMissingChunks) {
  Cluster cluster(small_cluster(3, true));
  cluster.create_user("u", "c");
  management::UploadOptions o;
  o.mode = management::UploadMode::Resilient;
  o.n = 3;
  o.k = 2;
  const auto d = cluster.gateway().upload(ObjectPath::parse("/u/c/x"), random_payload(1000, 3), o, cluster.user_token("u"));
  auto sweep = cluster.sweep();
  EXPECT_EQ(sweep.chunks, 3u);
  EXPECT_EQ(sweep.live_versions, 1u);
  EXPECT_TRUE(sweep.clean());
  EXPECT_TRUE(sweep.missing.empty());
  cluster.node(0).put_chunk(ChunkKey{Uuid::random(), 0}, random_payload(10, 4), cluster.admin_token());
  const auto& loc = d.chunk_locations[1];
  cluster.node(cluster.index_of(loc.container)).delete_chunk(ChunkKey{d.object_uuid, loc.index}, cluster.admin_token());
  sweep = cluster.sweep();
  EXPECT_EQ(sweep.orphans.size(), 1u);
  EXPECT_EQ(sweep.missing.size(), 1u);
  EXPECT_FALSE(sweep.clean());
}

HarnessScenario tiny(const std::string& extra) {
  return parse_harness_scenario(Json::parse(
      R"({"containers": {"count": 5, "mem_total": 67108864, "fs_total": 268435456, "rate_min": 0.01, "rate_max": 0.1},
          "workload": {"objects": 20, "size_min": 1000, "size_max": 3000, "distribution": "uniform"}, "seed": 4)" +
      extra + "}"));
}

TEST(Experiments, RetentionMatchesTheCodeTolerance) {
  const auto report = run_retention(tiny(R"(, "mode": "resilient", "n": 5, "k": 3)"));
  EXPECT_EQ(report.objects, 20u);
  EXPECT_EQ(report.tolerance, 2u);
  EXPECT_EQ(report.codes.at("(5,3)"), 20u);
  ASSERT_EQ(report.rows.size(), 6u);
  for (const auto& row : report.rows) {
    EXPECT_TRUE(row.exhaustive);
    EXPECT_DOUBLE_EQ(row.min, row.failures <= 2 ? 1.0 : 0.0) << row.failures;
  }
  EXPECT_EQ(report.row(3)->sets, 10u);
  EXPECT_GT(report.loss_probability, 0.0);
  EXPECT_NE(report.table().find("(5,3)"), std::string::npos);
  EXPECT_EQ(report.to_json()["rows"].size(), 6u);
}

TEST(Experiments, RetentionIsDeterministicPerSeed) {
  const auto sc = tiny(R"(, "mode": "resilient", "failures": {"mode": "sampled", "samples": 5})");
  EXPECT_EQ(run_retention(sc).to_json(), run_retention(sc).to_json());
}

TEST(Experiments, FairnessSpreadsEqualContainersEvenly) {
  auto sc = tiny("");
  sc.workload = WorkloadSpec{20, 2000, 2000, WorkloadSpec::Distribution::Fixed};
  const auto report = run_fairness(sc);
  EXPECT_EQ(report.objects, 20u);
  EXPECT_EQ(report.min_chunks, 4u);
  EXPECT_EQ(report.max_chunks, 4u);
}

TEST(Experiments, OverheadTracksNOverK) {
  const auto report = run_overhead(tiny(R"(, "configs": [[1, 1], [5, 2]])"));
  ASSERT_EQ(report.rows.size(), 2u);
  for (const auto& row : report.rows) {
    EXPECT_DOUBLE_EQ(row.expected, static_cast<double>(row.code.n) / row.code.k);
    EXPECT_GE(row.ratio, row.expected);
    EXPECT_LE(row.ratio, row.expected * 1.2) << "small objects carry relatively large headers";
  }
}

TEST(Experiments, ConsensusReportRendersBothForms) {
  const auto sc = tiny(R"(, "consensus": {"exhaustive_events": 3, "random_schedules": 20, "random_events": 10})");
  const auto report = run_consensus(sc);
  EXPECT_EQ(report.violations, 0u);
  EXPECT_EQ(report.random_schedules, 20u);
  EXPECT_EQ(consensus_to_json(report)["violations"], 0);
  EXPECT_FALSE(consensus_table(report).empty());
}

}  // namespace
}  // namespace dynostore::harness
