#include "dynostore/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "dynostore/client/client.hpp"
#include "dynostore/domain/error.hpp"
#include "dynostore/harness/cluster.hpp"
#include "dynostore/harness/report.hpp"
#include "dynostore/placement/planner.hpp"

namespace dynostore::harness {

namespace {

constexpr const char* kUser = "bench";
constexpr const char* kCollection = "data";

ObjectPath object_path(const std::string& stem, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%05zu", stem.c_str(), i);
  return ObjectPath::from_segments({kUser, kCollection, buf});
}

ClusterOptions cluster_options(const HarnessScenario& sc) {
  ClusterOptions o;
  o.containers = sc.containers;
  o.file_backed = sc.file_backed;
  o.seed = sc.seed;
  o.weights = sc.weights;
  return o;
}

management::UploadOptions upload_options(const HarnessScenario& sc) {
  management::UploadOptions o;
  o.mode = sc.mode;
  o.n = sc.n;
  o.k = sc.k;
  o.target_loss = sc.target_loss;
  return o;
}

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// All k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    out.push_back(pick);
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

std::vector<std::vector<std::size_t>> sample_sets(std::size_t n, std::size_t f, std::size_t samples,
                                                  std::mt19937_64& rng) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t s = 0; s < samples; ++s) {
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<std::size_t> pick(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(f));
    std::sort(pick.begin(), pick.end());
    out.push_back(std::move(pick));
  }
  return out;
}

std::string code_name(std::uint16_t n, std::uint16_t k) {
  return "(" + std::to_string(n) + "," + std::to_string(k) + ")";
}

WorkloadSpec::Distribution parse_distribution(const std::string& s) {
  if (s == "fixed") return WorkloadSpec::Distribution::Fixed;
  if (s == "uniform") return WorkloadSpec::Distribution::Uniform;
  if (s == "log_uniform") return WorkloadSpec::Distribution::LogUniform;
  throw Error(Errc::ScenarioInvalid, "unknown size distribution \"" + s + "\"");
}

// Uploads the scenario workload to `cluster`; returns the objects in order.
std::vector<std::pair<ObjectPath, Bytes>> upload_workload(Cluster& cluster, const HarnessScenario& sc,
                                                          const management::UploadOptions& options,
                                                          const std::string& stem,
                                                          std::vector<ObjectDescriptor>* descriptors) {
  std::mt19937_64 rng(sc.seed);
  const auto sizes = workload_sizes(sc.workload, rng);
  const auto token = cluster.user_token(kUser);
  std::vector<std::pair<ObjectPath, Bytes>> out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    auto path = object_path(stem, i);
    auto data = random_bytes(sizes[i], rng);
    auto d = cluster.gateway().upload(path, data, options, token);
    if (descriptors) descriptors->push_back(std::move(d));
    out.emplace_back(std::move(path), std::move(data));
  }
  return out;
}

}  // namespace

HarnessScenario parse_harness_scenario(const Json& doc) {
  HarnessScenario sc;
  try {
    if (!doc.is_object()) throw Error(Errc::ScenarioInvalid, "scenario must be an object");
    sc.containers = placement::parse_container_specs(doc.at("containers"));
    if (doc.contains("workload")) {
      const auto& w = doc["workload"];
      sc.workload.objects = w.value("objects", sc.workload.objects);
      sc.workload.size_min = w.value("size_min", sc.workload.size_min);
      sc.workload.size_max = w.value("size_max", std::max(sc.workload.size_max, sc.workload.size_min));
      sc.workload.distribution = parse_distribution(w.value("distribution", std::string("fixed")));
    }
    sc.mode = management::parse_upload_mode(doc.value("mode", std::string("regular")));
    if (doc.contains("n")) sc.n = doc["n"].get<std::uint16_t>();
    if (doc.contains("k")) sc.k = doc["k"].get<std::uint16_t>();
    sc.target_loss = doc.value("target_loss", sc.target_loss);
    if (doc.contains("weights")) {
      sc.weights.memory = doc["weights"].value("memory", sc.weights.memory);
      sc.weights.storage = doc["weights"].value("storage", sc.weights.storage);
    }
    if (doc.contains("failures")) {
      const auto& f = doc["failures"];
      const auto mode = f.value("mode", std::string("worst_case"));
      if (mode == "worst_case")
        sc.failures.mode = FailureSpec::Mode::WorstCase;
      else if (mode == "sampled")
        sc.failures.mode = FailureSpec::Mode::Sampled;
      else
        throw Error(Errc::ScenarioInvalid, "unknown failure mode \"" + mode + "\"");
      sc.failures.samples = f.value("samples", sc.failures.samples);
      sc.failures.max_sets = f.value("max_sets", sc.failures.max_sets);
      if (f.contains("max_failures")) sc.failures.max_failures = f["max_failures"].get<std::size_t>();
    }
    if (doc.contains("configs")) {
      for (const auto& c : doc["configs"]) sc.configs.push_back({c.at(0).get<std::uint16_t>(), c.at(1).get<std::uint16_t>()});
    }
    if (doc.contains("parallel")) {
      const auto& p = doc["parallel"];
      if (p.contains("channels")) sc.channels = p["channels"].get<std::vector<unsigned>>();
      sc.injected_latency = std::chrono::milliseconds(p.value("latency_ms", sc.injected_latency.count()));
    }
    if (doc.contains("consensus")) {
      const auto& c = doc["consensus"];
      sc.exhaustive_events = c.value("exhaustive_events", sc.exhaustive_events);
      sc.random_schedules = c.value("random_schedules", sc.random_schedules);
      sc.random_events = c.value("random_events", sc.random_events);
    }
    sc.seed = doc.value("seed", sc.seed);
    sc.file_backed = doc.value("file_backed", sc.file_backed);
  } catch (const Error& e) {
    if (e.code() == Errc::ScenarioInvalid) throw;
    throw Error(Errc::ScenarioInvalid, e.what());
  } catch (const Json::exception& e) {
    throw Error(Errc::ScenarioInvalid, e.what());
  }

  if (sc.workload.size_max < sc.workload.size_min) throw Error(Errc::ScenarioInvalid, "size_max < size_min");
  if (sc.workload.distribution == WorkloadSpec::Distribution::LogUniform && sc.workload.size_min == 0)
    throw Error(Errc::ScenarioInvalid, "log_uniform sizes need size_min >= 1");
  if (sc.n.has_value() != sc.k.has_value()) throw Error(Errc::ScenarioInvalid, "n and k go together");
  if (sc.n && (*sc.k < 1 || *sc.k > *sc.n)) throw Error(Errc::ScenarioInvalid, "need 1 <= k <= n");
  for (const auto& c : sc.configs)
    if (c.k < 1 || c.k > c.n) throw Error(Errc::ScenarioInvalid, "config " + code_name(c.n, c.k) + " needs 1 <= k <= n");
  for (auto c : sc.channels)
    if (c == 0) throw Error(Errc::ScenarioInvalid, "channel counts must be positive");
  if (!(sc.target_loss > 0.0 && sc.target_loss < 1.0)) throw Error(Errc::ScenarioInvalid, "target_loss must lie in (0,1)");
  try {
    sc.weights.validate();
  } catch (const Error& e) {
    throw Error(Errc::ScenarioInvalid, e.what());
  }
  return sc;
}

HarnessScenario load_harness_scenario(const std::filesystem::path& file) {
  return parse_harness_scenario(placement::load_scenario_json(file));
}

std::vector<std::uint64_t> workload_sizes(const WorkloadSpec& w, std::mt19937_64& rng) {
  std::vector<std::uint64_t> out;
  out.reserve(w.objects);
  for (std::size_t i = 0; i < w.objects; ++i) {
    switch (w.distribution) {
      case WorkloadSpec::Distribution::Fixed:
        out.push_back(w.size_min);
        break;
      case WorkloadSpec::Distribution::Uniform:
        out.push_back(std::uniform_int_distribution<std::uint64_t>(w.size_min, w.size_max)(rng));
        break;
      case WorkloadSpec::Distribution::LogUniform: {
        if (i == 0) {
          out.push_back(w.size_min);
          break;
        }
        if (i == 1) {
          out.push_back(w.size_max);
          break;
        }
        const double lo = std::log(static_cast<double>(w.size_min));
        const double hi = std::log(static_cast<double>(w.size_max));
        const double x = std::exp(std::uniform_real_distribution<double>(lo, hi)(rng));
        out.push_back(std::clamp(static_cast<std::uint64_t>(std::llround(x)), w.size_min, w.size_max));
        break;
      }
    }
  }
  return out;
}

Bytes random_bytes(std::uint64_t size, std::mt19937_64& rng) {
  Bytes out(size);
  std::size_t i = 0;
  for (; i + 8 <= size; i += 8) {
    const auto word = rng();
    for (int b = 0; b < 8; ++b) out[i + b] = static_cast<std::uint8_t>(word >> (8 * b));
  }
  if (i < size) {
    const auto word = rng();
    for (int b = 0; i < size; ++i, ++b) out[i] = static_cast<std::uint8_t>(word >> (8 * b));
  }
  return out;
}

// ---- retention ----

const RetentionRow* RetentionReport::row(std::size_t failures) const {
  for (const auto& r : rows)
    if (r.failures == failures) return &r;
  return nullptr;
}

RetentionReport run_retention(const HarnessScenario& sc) {
  Cluster cluster(cluster_options(sc));
  cluster.create_user(kUser, kCollection);
  std::vector<ObjectDescriptor> descriptors;
  const auto objects = upload_workload(cluster, sc, upload_options(sc), "obj", &descriptors);

  RetentionReport report;
  report.objects = objects.size();
  report.tolerance = objects.empty() ? 0 : 255;
  for (const auto& d : descriptors) {
    ++report.codes[code_name(d.n, d.k)];
    report.tolerance = std::min<std::size_t>(report.tolerance, d.n - d.k);
    std::vector<double> rates;
    for (const auto& loc : d.chunk_locations)
      rates.push_back(sc.containers.at(cluster.index_of(loc.container)).annual_failure_rate);
    report.loss_probability = std::max(report.loss_probability, placement::loss_probability(rates, d.k));
  }

  const std::size_t c = cluster.size();
  const std::size_t max_f = std::min(c, sc.failures.max_failures.value_or(c));
  const auto token = cluster.user_token(kUser);
  for (std::size_t f = 0; f <= max_f; ++f) {
    RetentionRow row;
    row.failures = f;
    std::vector<std::vector<std::size_t>> sets;
    if (sc.failures.mode == FailureSpec::Mode::WorstCase && binomial(c, f) <= sc.failures.max_sets) {
      sets = combinations(c, f);
      row.exhaustive = true;
    } else if (binomial(c, f) <= sc.failures.samples) {
      sets = combinations(c, f);
      row.exhaustive = true;
    } else {
      std::mt19937_64 rng(sc.seed * 1000003ULL + f);
      sets = sample_sets(c, f, sc.failures.samples, rng);
    }
    row.sets = sets.size();
    row.min = 1.0;
    row.max = 0.0;
    double sum = 0.0;
    for (const auto& set : sets) {
      for (auto i : set) cluster.kill(i);
      std::size_t ok = 0;
      for (const auto& [path, data] : objects) {
        try {
          if (cluster.gateway().download(path, std::nullopt, token) == data) ++ok;
        } catch (const Error&) {
        }
      }
      for (auto i : set) cluster.revive(i);
      const double pct = objects.empty() ? 1.0 : static_cast<double>(ok) / static_cast<double>(objects.size());
      row.min = std::min(row.min, pct);
      row.max = std::max(row.max, pct);
      sum += pct;
    }
    row.mean = sets.empty() ? 1.0 : sum / static_cast<double>(sets.size());
    report.rows.push_back(row);
  }
  return report;
}

Json RetentionReport::to_json() const {
  Json j;
  j["objects"] = objects;
  j["codes"] = codes;
  j["tolerance"] = tolerance;
  j["loss_probability"] = loss_probability;
  j["rows"] = Json::array();
  for (const auto& r : rows)
    j["rows"].push_back({{"failures", r.failures},
                         {"sets", r.sets},
                         {"exhaustive", r.exhaustive},
                         {"min", r.min},
                         {"mean", r.mean},
                         {"max", r.max}});
  return j;
}

std::string RetentionReport::table() const {
  TextTable t({"failures", "sets", "search", "min", "mean", "max"});
  for (const auto& r : rows)
    t.add_row({std::to_string(r.failures), std::to_string(r.sets), r.exhaustive ? "all" : "sampled", percent(r.min),
               percent(r.mean), percent(r.max)});
  std::string codes_text;
  for (const auto& [code, count] : codes) codes_text += " " + code + "x" + std::to_string(count);
  return "objects " + std::to_string(objects) + ", codes" + codes_text + ", tolerance " + std::to_string(tolerance) +
         ", annual loss " + fixed(loss_probability, 8) + "\n" + t.render();
}

// ---- fairness ----

FairnessReport run_fairness(const HarnessScenario& sc) {
  Cluster cluster(cluster_options(sc));
  cluster.create_user(kUser, kCollection);
  upload_workload(cluster, sc, upload_options(sc), "fair", nullptr);

  FairnessReport report;
  report.objects = sc.workload.objects;
  const auto counts = cluster.chunk_counts();
  double lo = 1.0, hi = 0.0;
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    const auto state = cluster.registry().state(cluster.container_id(i));
    FairnessRow row;
    row.name = sc.containers[i].name;
    auto it = counts.find(cluster.container_id(i));
    row.chunks = it == counts.end() ? 0 : it->second;
    if (state && state->fs_total > 0)
      row.fs_used = 1.0 - static_cast<double>(state->fs_available) / static_cast<double>(state->fs_total);
    if (state && state->mem_total > 0)
      row.mem_used = 1.0 - static_cast<double>(state->mem_available) / static_cast<double>(state->mem_total);
    lo = std::min(lo, row.fs_used);
    hi = std::max(hi, row.fs_used);
    report.rows.push_back(row);
  }
  if (!report.rows.empty()) {
    auto [mn, mx] = std::minmax_element(report.rows.begin(), report.rows.end(),
                                        [](const auto& a, const auto& b) { return a.chunks < b.chunks; });
    report.min_chunks = mn->chunks;
    report.max_chunks = mx->chunks;
    report.fs_spread = hi - lo;
  }
  return report;
}

Json FairnessReport::to_json() const {
  Json j;
  j["objects"] = objects;
  j["min_chunks"] = min_chunks;
  j["max_chunks"] = max_chunks;
  j["fs_spread"] = fs_spread;
  j["containers"] = Json::array();
  for (const auto& r : rows)
    j["containers"].push_back({{"name", r.name}, {"chunks", r.chunks}, {"fs_used", r.fs_used}, {"mem_used", r.mem_used}});
  return j;
}

std::string FairnessReport::table() const {
  TextTable t({"container", "chunks", "fs_used", "mem_used"});
  for (const auto& r : rows) t.add_row({r.name, std::to_string(r.chunks), percent(r.fs_used, 3), percent(r.mem_used, 3)});
  return "objects " + std::to_string(objects) + ", chunks per container " + std::to_string(min_chunks) + ".." +
         std::to_string(max_chunks) + ", fs spread " + percent(fs_spread, 3) + "\n" + t.render();
}

// ---- overhead ----

OverheadReport run_overhead(const HarnessScenario& sc) {
  OverheadReport report;
  auto configs = sc.configs;
  if (configs.empty()) configs.push_back({sc.n.value_or(1), sc.k.value_or(1)});
  for (const auto& code : configs) {
    Cluster cluster(cluster_options(sc));
    cluster.create_user(kUser, kCollection);
    management::UploadOptions options;
    if (code.n > 1 || code.k > 1) {
      options.mode = management::UploadMode::Resilient;
      options.n = code.n;
      options.k = code.k;
    }
    const auto before = cluster.stored_bytes();
    const auto objects = upload_workload(cluster, sc, options, "ovh", nullptr);
    OverheadRow row;
    row.code = code;
    for (const auto& [path, data] : objects) row.object_bytes += data.size();
    row.stored_bytes = cluster.stored_bytes() - before;
    row.ratio = row.object_bytes == 0 ? 0.0 : static_cast<double>(row.stored_bytes) / static_cast<double>(row.object_bytes);
    row.expected = static_cast<double>(code.n) / static_cast<double>(code.k);
    report.rows.push_back(row);
  }
  return report;
}

Json OverheadReport::to_json() const {
  Json j = Json::array();
  for (const auto& r : rows)
    j.push_back({{"n", r.code.n},
                 {"k", r.code.k},
                 {"object_bytes", r.object_bytes},
                 {"stored_bytes", r.stored_bytes},
                 {"ratio", r.ratio},
                 {"expected", r.expected}});
  return Json{{"configs", j}};
}

std::string OverheadReport::table() const {
  TextTable t({"code", "object_bytes", "stored_bytes", "ratio", "n/k"});
  for (const auto& r : rows)
    t.add_row({code_name(r.code.n, r.code.k), std::to_string(r.object_bytes), std::to_string(r.stored_bytes),
               fixed(r.ratio, 4), fixed(r.expected, 4)});
  return t.render();
}

// ---- parallel channels ----

ParallelReport run_parallelism(const HarnessScenario& sc) {
  ParallelReport report;
  report.latency_ms = sc.injected_latency.count();
  Cluster cluster(cluster_options(sc));
  cluster.create_user(kUser, kCollection);
  const auto endpoint = cluster.serve_gateway(sc.injected_latency);

  std::mt19937_64 rng(sc.seed);
  const auto sizes = workload_sizes(sc.workload, rng);
  std::vector<Bytes> payloads;
  for (auto s : sizes) payloads.push_back(random_bytes(s, rng));
  report.objects = payloads.size();
  for (const auto& p : payloads) report.object_bytes += p.size();

  for (auto channels : sc.channels) {
    client::ClientConfig config;
    config.gateway = endpoint;
    config.token = cluster.user_token(kUser);
    config.mode = sc.mode;
    config.n = sc.n;
    config.k = sc.k;
    config.threads = channels;
    client::Client client(config);
    std::vector<client::PushItem> items;
    for (std::size_t i = 0; i < payloads.size(); ++i)
      items.push_back({object_path("ch" + std::to_string(channels), i), payloads[i]});

    const auto start = std::chrono::steady_clock::now();
    const auto results = client.push_many(items, channels);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    for (const auto& r : results)
      if (!r.ok()) throw *r.error;
    report.rows.push_back({channels, elapsed.count()});
  }
  cluster.stop_gateway();
  return report;
}

Json ParallelReport::to_json() const {
  Json j;
  j["objects"] = objects;
  j["object_bytes"] = object_bytes;
  j["latency_ms"] = latency_ms;
  j["runs"] = Json::array();
  for (const auto& r : rows) j["runs"].push_back({{"channels", r.channels}, {"seconds", r.seconds}});
  return j;
}

std::string ParallelReport::table() const {
  TextTable t({"channels", "seconds", "vs first"});
  for (const auto& r : rows)
    t.add_row({std::to_string(r.channels), fixed(r.seconds, 3),
               rows.front().seconds > 0 ? percent(r.seconds / rows.front().seconds, 1) : "-"});
  return t.render();
}

// ---- loss estimate ----

MonteCarloEstimate monte_carlo_loss(std::span<const double> rates, unsigned k, std::size_t trials,
                                    std::uint64_t seed) {
  if (k == 0 || k > rates.size()) throw Error(Errc::InvalidParams, "need 1 <= k <= n");
  const std::size_t tolerance = rates.size() - k;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t lost = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t failed = 0;
    for (double r : rates) failed += u(rng) < r ? 1 : 0;
    if (failed > tolerance) ++lost;
  }
  MonteCarloEstimate e;
  e.trials = trials;
  e.loss = trials == 0 ? 0.0 : static_cast<double>(lost) / static_cast<double>(trials);
  e.sigma = trials == 0 ? 0.0 : std::sqrt(e.loss * (1.0 - e.loss) / static_cast<double>(trials));
  return e;
}

// ---- consensus ----

ConsensusReport run_consensus(const HarnessScenario& sc) {
  return run_consensus_schedules(sc.exhaustive_events, sc.random_schedules, sc.random_events, sc.seed);
}

Json consensus_to_json(const ConsensusReport& r) {
  return Json{{"configurations", r.configurations},   {"exhaustive_states", r.exhaustive_states},
              {"exhaustive_leaves", r.exhaustive_leaves}, {"random_schedules", r.random_schedules},
              {"random_events", r.random_events},     {"committed_writes", r.committed_writes},
              {"violations", r.violations},           {"violation_message", r.violation_message},
              {"violation_schedule", r.violation}};
}

std::string consensus_table(const ConsensusReport& r) {
  TextTable t({"measure", "value"});
  t.add_row({"configurations", std::to_string(r.configurations)});
  t.add_row({"exhaustive states", std::to_string(r.exhaustive_states)});
  t.add_row({"exhaustive leaves", std::to_string(r.exhaustive_leaves)});
  t.add_row({"random schedules", std::to_string(r.random_schedules)});
  t.add_row({"random events", std::to_string(r.random_events)});
  t.add_row({"committed writes", std::to_string(r.committed_writes)});
  t.add_row({"violations", std::to_string(r.violations)});
  std::string out = t.render();
  if (!r.violation.empty()) {
    out += "first violation: " + r.violation_message + "\n";
    for (const auto& step : r.violation) out += "  " + step + "\n";
  }
  return out;
}

}  // namespace dynostore::harness
