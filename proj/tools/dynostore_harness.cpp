// dynostore-harness: desk-scale experiments over an in-process cluster.
#include <CLI11.hpp>

#include <iostream>

#include "dynostore/domain/error.hpp"
#include "dynostore/harness/experiments.hpp"
#include "dynostore/harness/report.hpp"

int main(int argc, char** argv) {
  using namespace dynostore;
  using namespace dynostore::harness;

  CLI::App app{"DynoStore experiment harness"};
  app.require_subcommand(1);
  std::string scenario_file, report_file;
  std::optional<std::uint64_t> seed;
  for (const char* name : {"retention", "fairness", "overhead", "parallel", "consensus"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--scenario", scenario_file, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Overrides the scenario seed");
    sub->add_option("--report", report_file, "Also write the JSON report here");
  }
  CLI11_PARSE(app, argc, argv);

  try {
    auto sc = load_harness_scenario(scenario_file);
    if (seed) sc.seed = *seed;
    const std::string verb = app.get_subcommands().front()->get_name();

    Json report;
    std::string table;
    int status = 0;
    if (verb == "retention") {
      const auto r = run_retention(sc);
      report = r.to_json();
      table = r.table();
      for (const auto& row : r.rows)
        if (row.failures <= r.tolerance && row.min < 1.0) status = 1;
    } else if (verb == "fairness") {
      const auto r = run_fairness(sc);
      report = r.to_json();
      table = r.table();
    } else if (verb == "overhead") {
      const auto r = run_overhead(sc);
      report = r.to_json();
      table = r.table();
    } else if (verb == "parallel") {
      const auto r = run_parallelism(sc);
      report = r.to_json();
      table = r.table();
    } else {
      const auto r = run_consensus(sc);
      report = consensus_to_json(r);
      table = consensus_table(r);
      if (r.violations > 0) status = 1;
    }
    report["experiment"] = verb;
    report["seed"] = sc.seed;
    std::cout << table;
    if (!report_file.empty()) write_json_report(report_file, report);
    return status;
  } catch (const Error& e) {
    std::cerr << "error: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return 2;
  }
}
