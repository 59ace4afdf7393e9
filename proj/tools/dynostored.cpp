// dynostored: runs one DynoStore service (container, metadata node or
// gateway) from a JSON config until SIGINT/SIGTERM.
#include <CLI11.hpp>

#include <condition_variable>
#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>
#include <mutex>
#include <stop_token>
#include <thread>

#include "dynostore/container/http.hpp"
#include "dynostore/container/node.hpp"
#include "dynostore/domain/error.hpp"
#include "dynostore/management/gateway.hpp"
#include "dynostore/management/health.hpp"
#include "dynostore/management/http.hpp"
#include "dynostore/metadata/http.hpp"
#include "dynostore/metadata/transport.hpp"
#include "dynostore/net/http.hpp"
#include "dynostore/placement/scenario.hpp"

namespace {

using namespace dynostore;

Bytes load_secret(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::InvalidParams, "cannot read secret file " + file);
  Bytes secret((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (secret.size() < 32) throw Error(Errc::InvalidParams, "secret file must hold at least 32 bytes");
  return secret;
}

std::pair<std::string, int> split_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw Error(Errc::InvalidParams, "address must be host:port: " + address);
  return {address.substr(0, colon), std::stoi(address.substr(colon + 1))};
}

void wait_for_signal(sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
  std::clog << "signal " << sig << ", shutting down\n";
}

void register_with_gateway(const container::ContainerConfig& config, const std::string& endpoint) {
  for (int attempt = 0; attempt < 30; ++attempt) {
    try {
      auto client = net::make_client(config.gateway_address);
      const auto body = Json{{"endpoint", endpoint}}.dump();
      const auto& res = net::expect_ok(
          client->Post("/containers", net::auth_headers(config.registration_token), body, "application/json"),
          "register container");
      std::clog << "registered with " << config.gateway_address << ": " << res.body << "\n";
      return;
    } catch (const Error& e) {
      if (e.code() != Errc::Unavailable) throw;
      std::this_thread::sleep_for(std::chrono::seconds(1));
    }
  }
  throw Error(Errc::Unavailable, "gateway " + config.gateway_address + " unreachable");
}

int run_container(const std::string& config_file, const management::TokenAuthority& authority, sigset_t& signals) {
  const auto config = container::ContainerConfig::load(config_file);
  auto node = container::open_container(config, authority);
  const auto [host, port] = split_address(config.listen_address);
  container::ContainerServer server(*node, host, port);
  server.start();
  std::clog << "container " << config.name << " (" << config.id.to_string() << ") on " << server.endpoint() << "\n";
  if (!config.gateway_address.empty()) register_with_gateway(config, server.endpoint());
  wait_for_signal(signals);
  server.stop();
  return 0;
}

int run_metadata(const Json& config, const management::TokenAuthority& authority, const Clock& clock,
                 sigset_t& signals) {
  const auto endpoints = config.at("replicas").get<std::vector<std::string>>();
  const auto self = config.at("self").get<std::size_t>();
  if (self >= endpoints.size()) throw Error(Errc::InvalidParams, "\"self\" is not a replica index");
  const auto service_token = authority.issue("metadata", {Mode::Admin}, std::chrono::hours(24 * 365)).encode();

  metadata::Replica::Options replica_options;
  replica_options.dir = config.value("data_dir", std::string("metadata-") + std::to_string(self));
  replica_options.lock_lease = std::chrono::milliseconds(config.value("lease_ms", 10000));
  replica_options.sync_journal = config.value("sync_journal", true);
  replica_options.snapshot_every = config.value("snapshot_every", std::size_t{1000});
  auto replica = std::make_shared<metadata::Replica>("replica-" + std::to_string(self), replica_options);

  std::vector<std::shared_ptr<metadata::ReplicaTransport>> transports, peers;
  for (std::size_t i = 0; i < endpoints.size(); ++i) {
    if (i == self) {
      transports.push_back(std::make_shared<metadata::LocalTransport>(replica));
    } else {
      auto remote = std::make_shared<metadata::HttpReplicaTransport>(endpoints[i], service_token);
      transports.push_back(remote);
      peers.push_back(remote);
    }
  }
  metadata::MetadataService::Options options;
  options.proposer_id = static_cast<std::uint32_t>(self + 1);
  options.lease = *replica_options.lock_lease;
  metadata::MetadataService service(transports, authority, clock, options);

  const auto [host, port] = split_address(config.value("listen", std::string("127.0.0.1:0")));
  metadata::MetadataServer server(service, replica, authority, host, port);
  server.enable_anti_entropy(std::make_shared<metadata::AntiEntropy>(replica, peers),
                             std::chrono::milliseconds(config.value("anti_entropy_ms", 1000)));
  server.start();
  std::clog << "metadata replica " << self << " on " << server.endpoint() << "\n";
  wait_for_signal(signals);
  server.stop();
  return 0;
}

int run_gateway(const Json& config, const management::TokenAuthority& authority, const Clock& clock,
                sigset_t& signals) {
  metadata::MetadataClient metadata(config.at("metadata").get<std::vector<std::string>>());
  management::AuthService auth(authority);
  for (const auto& u : config.value("users", Json::array())) {
    std::vector<Mode> scopes{Mode::Read, Mode::Write};
    if (u.value("admin", false)) scopes.push_back(Mode::Admin);
    auth.add_user(u.at("user").get<std::string>(), u.at("password").get<std::string>(), scopes);
  }
  management::Registry registry;
  management::Gateway::Options options;
  options.default_target_loss = config.value("default_target_loss", options.default_target_loss);
  if (config.contains("weights")) {
    options.weights.memory = config["weights"].value("memory", options.weights.memory);
    options.weights.storage = config["weights"].value("storage", options.weights.storage);
    options.weights.validate();
  }
  management::Gateway gateway(registry, metadata, authority, clock, options);
  management::HealthChecker health(
      registry, clock, {std::chrono::milliseconds(config.value("health_interval_ms", 10000)), config.value("failure_threshold", 3)});

  const auto [host, port] = split_address(config.value("listen", std::string("127.0.0.1:8080")));
  management::GatewayServer server(gateway, auth, host, port);
  // Unreachable chunk deletions are retried after every probe round.
  health.on_tick([&gateway] { gateway.flush_pending_deletes(); });
  const std::chrono::milliseconds gc_interval(config.value("gc_interval_ms", 3'600'000));
  std::mutex gc_mu;
  std::condition_variable_any gc_cv;
  std::jthread collector([&](std::stop_token stop) {
    std::unique_lock lock(gc_mu);
    while (!gc_cv.wait_for(lock, stop, gc_interval, [] { return false; })) {
      try {
        const auto purged = gateway.garbage_collect(gateway.service_token());
        if (!purged.empty()) std::clog << "gc purged " << purged.size() << " versions\n";
      } catch (const std::exception& e) {
        std::clog << "gc failed: " << e.what() << "\n";
      }
    }
  });

  server.start();
  health.start();
  std::clog << "gateway on " << server.endpoint() << "\n";
  wait_for_signal(signals);
  collector.request_stop();
  collector.join();
  health.stop();
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DynoStore service daemon"};
  app.require_subcommand(1);
  std::string config_file, secret_file;
  for (const char* name : {"container", "metadata", "gateway"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_file, "Service config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--secret-file", secret_file, "Shared token secret")->required()->check(CLI::ExistingFile);
  }
  auto* token = app.add_subcommand("token", "Mint a token under the shared secret");
  std::string subject = "admin";
  std::vector<std::string> scopes{"read", "write", "admin"};
  int ttl_hours = 24;
  token->add_option("--secret-file", secret_file)->required()->check(CLI::ExistingFile);
  token->add_option("--subject", subject);
  token->add_option("--scopes", scopes)->delimiter(',');
  token->add_option("--ttl-hours", ttl_hours)->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try {
    SystemClock clock;
    management::TokenAuthority authority(load_secret(secret_file), clock);
    if (token->parsed()) {
      std::vector<Mode> modes;
      for (const auto& s : scopes) modes.push_back(parse_mode(s));
      std::cout << authority.issue(subject, modes, std::chrono::hours(ttl_hours)).encode() << "\n";
      return 0;
    }
    const std::string verb = app.get_subcommands().front()->get_name();
    if (verb == "container") return run_container(config_file, authority, signals);
    const auto config = placement::load_scenario_json(config_file);
    if (verb == "metadata") return run_metadata(config, authority, clock, signals);
    return run_gateway(config, authority, clock, signals);
  } catch (const Error& e) {
    std::cerr << "error: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
