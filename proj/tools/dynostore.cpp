// dynostore: command-line client for a DynoStore gateway.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>

#include "dynostore/client/client.hpp"
#include "dynostore/client/handle.hpp"
#include "dynostore/domain/error.hpp"
#include "dynostore/placement/planner.hpp"
#include "dynostore/placement/scenario.hpp"

namespace {

using namespace dynostore;

Bytes read_input(const std::string& file) {
  if (file == "-") {
    std::cin >> std::noskipws;
    return Bytes(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::NotFound, "cannot read " + file);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_output(const std::string& file, const Bytes& data) {
  if (file.empty() || file == "-") {
    std::cout.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    std::cout.flush();
    return;
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::BackendFailure, "cannot write " + file);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

std::string base_name(const std::string& file) {
  auto name = std::filesystem::path(file).filename().string();
  return name.empty() ? "stdin" : name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DynoStore client"};
  app.require_subcommand(1);

  client::ClientConfig config;
  std::string key_file, mode = "regular";
  std::optional<std::uint16_t> n, k;
  std::optional<double> target_loss;
  config.gateway = "http://127.0.0.1:8080";
  app.add_option("--gateway", config.gateway, "Gateway URL")->envname("DYNOSTORE_GATEWAY");
  app.add_option("--token", config.token, "Bearer token")->envname("DYNOSTORE_TOKEN");
  app.add_option("--user", config.user, "User for password login")->envname("DYNOSTORE_USER");
  app.add_option("--password", config.password, "Password for login")->envname("DYNOSTORE_PASSWORD");
  app.add_option("--threads", config.threads, "Parallel channels")->check(CLI::PositiveNumber);
  app.add_option("--encrypt-key-file", key_file, "32-byte AES-256 key; encrypts on push, decrypts on pull");

  auto* push = app.add_subcommand("push", "Upload files (one file: DEST is the object path; several: a collection)");
  std::string push_dest;
  std::vector<std::string> push_files;
  push->add_option("dest", push_dest, "Object or collection path")->required();
  push->add_option("files", push_files, "Input files, - for stdin")->required();
  push->add_option("--mode", mode, "regular or resilient")->check(CLI::IsMember({"regular", "resilient"}));
  push->add_option("--n", n, "Total chunks (resilient)");
  push->add_option("--k", k, "Chunks needed to rebuild (resilient)");
  push->add_option("--target-loss", target_loss, "Annual loss target for the planner");

  auto* pull = app.add_subcommand("pull", "Download an object or a reference handle");
  std::string pull_src, pull_out;
  std::optional<std::uint32_t> pull_version;
  pull->add_option("object", pull_src, "Object path or dyn:// handle")->required();
  pull->add_option("-o,--output", pull_out, "Output file (default stdout)");
  pull->add_option("--version", pull_version, "Version number (default newest)");

  auto* exists = app.add_subcommand("exists", "Exit 0 when the object exists, 2 otherwise");
  std::string exists_path;
  exists->add_option("object", exists_path)->required();

  auto* evict = app.add_subcommand("evict", "Remove an object and every version");
  std::string evict_path;
  evict->add_option("object", evict_path)->required();

  auto* plan = app.add_subcommand("plan", "Offline resilience plan for a scenario file");
  std::string plan_scenario;
  plan->add_option("--scenario", plan_scenario)->required()->check(CLI::ExistingFile);

  auto* admin = app.add_subcommand("admin", "Administrative operations");
  admin->require_subcommand(1);
  std::string arg1, arg2, arg3;
  bool deny = false;
  auto* ns = admin->add_subcommand("namespace", "Create a user namespace");
  ns->add_option("user", arg1)->required();
  auto* coll = admin->add_subcommand("collection", "Create a collection");
  coll->add_option("path", arg1)->required();
  auto* where = admin->add_subcommand("collection-path", "Print the path of the collection with this id");
  where->add_option("id", arg1)->required();
  auto* grant = admin->add_subcommand("grant", "Grant (or deny) a user a mode on a path");
  grant->add_option("path", arg1)->required();
  grant->add_option("user", arg2)->required();
  grant->add_option("mode", arg3)->required()->check(CLI::IsMember({"read", "write", "admin"}));
  grant->add_flag("--deny", deny, "Revoke instead of grant");
  auto* list = admin->add_subcommand("containers", "List registered containers");
  auto* reg = admin->add_subcommand("register", "Register a container endpoint");
  reg->add_option("endpoint", arg1)->required();
  auto* dereg = admin->add_subcommand("deregister", "Deregister a container");
  dereg->add_option("id", arg1)->required();
  auto* gc = admin->add_subcommand("gc", "Expire versions past retention");
  auto* token = admin->add_subcommand("token", "Exchange --user/--password for a token");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan->parsed()) {
      const auto sc = placement::parse_planner_scenario(placement::load_scenario_json(plan_scenario));
      const auto states = placement::to_states(sc.containers, sc.seed);
      const auto result = placement::plan_resilience(states, sc.object_size, sc.target_loss, sc.weights);
      std::cout << placement::plan_to_json(result).dump(2) << "\n";
      return 0;
    }

    config.mode = management::parse_upload_mode(mode);
    config.n = n;
    config.k = k;
    config.target_loss = target_loss;
    if (!key_file.empty()) {
      config.encrypt = true;
      config.key = client::load_key_file(key_file);
    }
    client::Client c(config);

    if (push->parsed()) {
      if (push_files.size() == 1) {
        const auto data = read_input(push_files[0]);
        std::cout << client::make_handle(c.push(ObjectPath::parse(push_dest), data)).str() << "\n";
        return 0;
      }
      std::vector<client::PushItem> items;
      for (const auto& f : push_files)
        items.push_back({ObjectPath::parse(push_dest).child(base_name(f)), read_input(f)});
      int status = 0;
      const auto results = c.push_many(items);
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].ok()) {
          std::cout << client::make_handle(*results[i].value).str() << "\n";
        } else {
          std::cerr << push_files[i] << ": " << results[i].error->what() << "\n";
          status = std::max(status, client::exit_code_for(results[i].error->code()));
        }
      }
      return status;
    }
    if (pull->parsed()) {
      if (pull_src.rfind("dyn://", 0) == 0) {
        const auto handle = client::ReferenceHandle::parse(pull_src);
        write_output(pull_out, c.pull(handle.path, handle.version));
      } else {
        write_output(pull_out, c.pull(ObjectPath::parse(pull_src), pull_version));
      }
      return 0;
    }
    if (exists->parsed()) {
      const bool found = c.exists(ObjectPath::parse(exists_path));
      std::cout << (found ? "yes" : "no") << "\n";
      return found ? 0 : 2;
    }
    if (evict->parsed()) {
      c.evict(ObjectPath::parse(evict_path));
      return 0;
    }
    if (ns->parsed()) {
      std::cout << c.create_namespace(arg1).to_string() << "\n";
    } else if (coll->parsed()) {
      std::cout << c.create_collection(ObjectPath::parse(arg1)).to_string() << "\n";
    } else if (where->parsed()) {
      std::cout << c.collection_path(Uuid::parse(arg1)).str() << "\n";
    } else if (grant->parsed()) {
      c.grant(Permission{arg2, parse_mode(arg3), ObjectPath::parse(arg1), deny});
    } else if (list->parsed()) {
      Json out = Json::array();
      for (const auto& s : c.containers()) out.push_back(s);
      std::cout << out.dump(2) << "\n";
    } else if (reg->parsed()) {
      std::cout << c.register_container(arg1).to_string() << "\n";
    } else if (dereg->parsed()) {
      c.deregister_container(Uuid::parse(arg1));
    } else if (gc->parsed()) {
      std::cout << c.garbage_collect().size() << " versions expired\n";
    } else if (token->parsed()) {
      std::cout << c.token() << "\n";
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return client::exit_code_for(e.code());
  }
}
