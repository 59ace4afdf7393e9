#include "dynostore/placement/scenario.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "dynostore/domain/error.hpp"

namespace dynostore::placement {

std::vector<ContainerSpec> parse_container_specs(const Json& node) {
  std::vector<ContainerSpec> specs;
  try {
    if (node.is_array()) {
      for (std::size_t i = 0; i < node.size(); ++i) {
        const auto& c = node[i];
        ContainerSpec s;
        s.name = c.value("name", "dc" + std::to_string(i));
        if (c.contains("id")) s.id = c["id"].get<Uuid>();
        s.mem_total = c.at("mem_total").get<std::uint64_t>();
        s.fs_total = c.at("fs_total").get<std::uint64_t>();
        s.mem_used = c.value("mem_used", std::uint64_t{0});
        s.fs_used = c.value("fs_used", std::uint64_t{0});
        s.annual_failure_rate = c.value("annual_failure_rate", 0.0);
        s.healthy = c.value("healthy", true);
        specs.push_back(std::move(s));
      }
    } else if (node.is_object()) {
      const auto count = node.at("count").get<std::size_t>();
      const double lo = node.value("rate_min", 0.0);
      const double hi = node.value("rate_max", lo);
      for (std::size_t i = 0; i < count; ++i) {
        ContainerSpec s;
        s.name = "dc" + std::to_string(i);
        s.mem_total = node.at("mem_total").get<std::uint64_t>();
        s.fs_total = node.at("fs_total").get<std::uint64_t>();
        s.annual_failure_rate = count > 1 ? lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1) : lo;
        specs.push_back(std::move(s));
      }
    } else {
      throw Error(Errc::ScenarioInvalid, "\"containers\" must be a list or a generator object");
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::ScenarioInvalid, std::string("bad container spec: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::ScenarioInvalid) throw;
    throw Error(Errc::ScenarioInvalid, e.what());
  }
  for (const auto& s : specs) {
    if (s.mem_used > s.mem_total || s.fs_used > s.fs_total) {
      throw Error(Errc::ScenarioInvalid, "container " + s.name + " uses more than its total");
    }
    if (!(s.annual_failure_rate >= 0.0 && s.annual_failure_rate <= 1.0)) {
      throw Error(Errc::ScenarioInvalid, "container " + s.name + " has a failure rate outside [0,1]");
    }
  }
  if (specs.empty()) throw Error(Errc::ScenarioInvalid, "scenario declares no containers");
  return specs;
}

PlannerScenario parse_planner_scenario(const Json& doc) {
  PlannerScenario sc;
  try {
    sc.containers = parse_container_specs(doc.at("containers"));
    sc.target_loss = doc.value("target_loss", sc.target_loss);
    sc.object_size = doc.value("object_size", sc.object_size);
    sc.seed = doc.value("seed", sc.seed);
    if (doc.contains("weights")) {
      sc.weights.memory = doc["weights"].value("memory", sc.weights.memory);
      sc.weights.storage = doc["weights"].value("storage", sc.weights.storage);
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::ScenarioInvalid, e.what());
  }
  if (!(sc.target_loss > 0.0 && sc.target_loss < 1.0)) throw Error(Errc::ScenarioInvalid, "target_loss must lie in (0,1)");
  try {
    sc.weights.validate();
  } catch (const Error& e) {
    throw Error(Errc::ScenarioInvalid, e.what());
  }
  return sc;
}

Json load_scenario_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::ScenarioInvalid, "cannot open scenario " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::exception& e) {
    throw Error(Errc::ScenarioInvalid, file.string() + ": " + e.what());
  }
}

std::vector<ContainerState> to_states(const std::vector<ContainerSpec>& specs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ContainerState> out;
  out.reserve(specs.size());
  for (const auto& s : specs) {
    ContainerState st;
    Uuid drawn = Uuid::random(rng);
    st.container_id = s.id.value_or(drawn);
    st.name = s.name;
    st.mem_total = s.mem_total;
    st.mem_available = s.mem_total - s.mem_used;
    st.fs_total = s.fs_total;
    st.fs_available = s.fs_total - s.fs_used;
    st.annual_failure_rate = s.annual_failure_rate;
    st.healthy = s.healthy;
    out.push_back(std::move(st));
  }
  return out;
}

Json plan_to_json(const ResiliencePlan& plan) {
  return Json{{"n", plan.params.n},
              {"k", plan.params.k},
              {"tolerance", plan.params.tolerance()},
              {"targets", plan.targets},
              {"loss_probability", plan.loss_probability},
              {"feasible", plan.feasible}};
}

}  // namespace dynostore::placement
