#include "dynostore/client/client.hpp"

#include <atomic>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

#include "dynostore/net/http.hpp"

namespace dynostore::client {

namespace {

std::string object_route(const ObjectPath& path) { return "/objects" + net::encode_path(path.str()); }

template <class T, class Fn>
std::vector<Outcome<T>> run_channels(std::size_t count, unsigned threads, Fn&& fn) {
  std::vector<Outcome<T>> results(count);
  std::atomic<std::size_t> next{0};
  auto channel = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        results[i].value = fn(i);
      } catch (const Error& e) {
        results[i].error = e;
      } catch (const std::exception& e) {
        results[i].error = Error(Errc::Unavailable, e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(channel);
  channel();
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace

void ClientConfig::validate() const {
  if (threads < 1) throw Error(Errc::InvalidParams, "threads must be >= 1");
  if (encrypt && !key) throw Error(Errc::EncryptionKeyMissing, "encryption is on but no key was supplied");
  if (!encrypt && key) throw Error(Errc::InvalidParams, "a key was supplied but encryption is off");
  if (gateway.empty()) throw Error(Errc::InvalidParams, "no gateway endpoint");
}

Client::Client(ClientConfig config) : config_(std::move(config)) {
  config_.validate();
  pool_ = std::make_unique<net::ClientPool>(config_.gateway,
                                            net::ClientOptions{std::chrono::milliseconds(2000), config_.timeout});
}

Client::~Client() = default;

const std::string& Client::token() {
  std::lock_guard lock(token_mu_);
  if (config_.token.empty()) {
    if (config_.user.empty()) throw Error(Errc::Unauthorized, "no token and no credentials configured");
    auto cli = pool_->borrow();
    auto res = cli->Post("/auth/token", Json{{"user", config_.user}, {"password", config_.password}}.dump(),
                         "application/json");
    config_.token = parse_json(net::expect_ok(res, "login").body).at("token").get<std::string>();
  }
  return config_.token;
}

std::string Client::query() const {
  std::string q = "?mode=" + std::string(management::upload_mode_name(config_.mode));
  if (config_.n) q += "&n=" + std::to_string(*config_.n);
  if (config_.k) q += "&k=" + std::to_string(*config_.k);
  if (config_.target_loss) {
    std::ostringstream os;
    os << *config_.target_loss;
    q += "&target_loss=" + os.str();
  }
  return q;
}

ObjectDescriptor Client::push(const ObjectPath& path, ByteView data) {
  auto headers = net::auth_headers(token());
  Bytes sealed;
  ByteView body = data;
  if (config_.encrypt) {
    sealed = encrypt(data, *config_.key);
    body = sealed;
    headers.emplace("X-Dyn-Client-Tag", encrypted_tag(data));
  }
  auto cli = pool_->borrow();
  auto res = cli->Put(object_route(path) + query(), headers, std::string(as_chars(body)), "application/octet-stream");
  return parse_json(net::expect_ok(res, "push " + path.str()).body).get<ObjectDescriptor>();
}

ObjectDescriptor Client::push_file(const ObjectPath& path, const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::NotFound, "cannot read " + file.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return push(path, data);
}

Bytes Client::pull(const ObjectPath& path, std::optional<std::uint32_t> version) {
  std::string route = object_route(path);
  if (version) route += "?version=" + std::to_string(*version);
  auto cli = pool_->borrow();
  auto res = cli->Get(route, net::auth_headers(token()));
  const auto& ok = net::expect_ok(res, "pull " + path.str());
  Bytes data = to_bytes(ok.body);
  const auto tag = ok.get_header_value("X-Dyn-Client-Tag");
  if (!is_encrypted_tag(tag)) return data;
  if (!config_.key) throw Error(Errc::EncryptionKeyMissing, path.str() + " is encrypted");
  auto plain = decrypt(data, *config_.key);
  verify_plaintext(tag, plain);
  return plain;
}

bool Client::exists(const ObjectPath& path) {
  auto cli = pool_->borrow();
  auto res = cli->Head(object_route(path), net::auth_headers(token()));
  if (res && res->status == 200) return true;
  if (res && res->get_header_value("X-Dyn-Error") == "NotFound") return false;
  net::throw_remote(res, "exists " + path.str());
}

void Client::evict(const ObjectPath& path) {
  auto cli = pool_->borrow();
  net::expect_ok(cli->Delete(object_route(path), net::auth_headers(token())), "evict " + path.str());
}

std::vector<Outcome<ObjectDescriptor>> Client::push_many(const std::vector<PushItem>& items, unsigned threads) {
  token();
  return run_channels<ObjectDescriptor>(items.size(), threads ? threads : config_.threads,
                                        [&](std::size_t i) { return push(items[i].path, items[i].data); });
}

std::vector<Outcome<Bytes>> Client::pull_many(const std::vector<ObjectPath>& paths, unsigned threads) {
  token();
  return run_channels<Bytes>(paths.size(), threads ? threads : config_.threads,
                             [&](std::size_t i) { return pull(paths[i]); });
}

Uuid Client::create_namespace(const UserId& user) {
  auto cli = pool_->borrow();
  const auto res =
      cli->Post("/namespaces", net::auth_headers(token()), Json{{"user", user}}.dump(), "application/json");
  return parse_json(net::expect_ok(res, "create namespace").body).at("id").get<Uuid>();
}

Uuid Client::create_collection(const ObjectPath& path) {
  auto cli = pool_->borrow();
  const auto res =
      cli->Post("/collections", net::auth_headers(token()), Json{{"path", path}}.dump(), "application/json");
  return parse_json(net::expect_ok(res, "create collection").body).at("id").get<Uuid>();
}

ObjectPath Client::collection_path(const Uuid& id) {
  auto cli = pool_->borrow();
  const auto res = cli->Get("/collections?id=" + id.to_string(), net::auth_headers(token()));
  return parse_json(net::expect_ok(res, "collection lookup").body).at("path").get<ObjectPath>();
}

void Client::grant(const Permission& permission) {
  auto cli = pool_->borrow();
  net::expect_ok(cli->Post("/permissions", net::auth_headers(token()), Json(permission).dump(), "application/json"),
                 "grant");
}

std::vector<ContainerState> Client::containers() {
  auto cli = pool_->borrow();
  return parse_json(net::expect_ok(cli->Get("/containers", net::auth_headers(token())), "containers").body)
      .get<std::vector<ContainerState>>();
}

Uuid Client::register_container(const std::string& endpoint) {
  auto cli = pool_->borrow();
  auto res = cli->Post("/containers", net::auth_headers(token()), Json{{"endpoint", endpoint}}.dump(),
                       "application/json");
  return parse_json(net::expect_ok(res, "register container").body).at("id").get<Uuid>();
}

void Client::deregister_container(const Uuid& id) {
  auto cli = pool_->borrow();
  net::expect_ok(cli->Delete("/containers/" + id.to_string(), net::auth_headers(token())), "deregister container");
}

std::vector<ObjectDescriptor> Client::garbage_collect() {
  auto cli = pool_->borrow();
  auto res = cli->Post("/gc", net::auth_headers(token()), "{}", "application/json");
  return parse_json(net::expect_ok(res, "gc").body).get<std::vector<ObjectDescriptor>>();
}

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::NotFound:
    case Errc::ParentNotFound:
    case Errc::CollectionNotFound:
    case Errc::ScopeNotFound:
    case Errc::UnknownContainer:
    case Errc::VersionExpired:
      return 2;
    case Errc::PermissionDenied:
    case Errc::Unauthorized:
    case Errc::BadCredentials:
      return 3;
    case Errc::HashMismatch:
    case Errc::InconsistentHeaders:
    case Errc::BadMagic:
    case Errc::Truncated:
    case Errc::WrongKey:
      return 4;
    case Errc::Unavailable:
    case Errc::NotEnoughChunks:
    case Errc::NotEnoughContainers:
    case Errc::NoFeasibleContainer:
    case Errc::ContainerWriteFailed:
    case Errc::ConsensusFailed:
      return 5;
    default:
      return 1;
  }
}

}  // namespace dynostore::client
