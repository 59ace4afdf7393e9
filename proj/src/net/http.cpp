#include "dynostore/net/http.hpp"

#include <cctype>

namespace dynostore::net {

int http_status_for(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyPath:
    case Errc::IllegalCharacter:
    case Errc::PathTooLong:
    case Errc::BadRequest:
    case Errc::InvalidParams:
    case Errc::InvalidDescriptor:
    case Errc::BadMagic:
    case Errc::Truncated:
    case Errc::ScenarioInvalid:
      return 400;
    case Errc::Unauthorized:
    case Errc::BadCredentials:
      return 401;
    case Errc::PermissionDenied:
      return 403;
    case Errc::NotFound:
    case Errc::ParentNotFound:
    case Errc::CollectionNotFound:
    case Errc::ScopeNotFound:
    case Errc::UnknownContainer:
      return 404;
    case Errc::AlreadyExists:
      return 409;
    case Errc::VersionExpired:
      return 410;
    case Errc::HashMismatch:
    case Errc::InconsistentHeaders:
    case Errc::WrongKey:
    case Errc::EncryptionKeyMissing:
      return 422;
    case Errc::OutOfSpace:
    case Errc::InsufficientCapacity:
      return 507;
    case Errc::NotEnoughContainers:
    case Errc::NotEnoughChunks:
    case Errc::NoFeasibleContainer:
    case Errc::ConsensusFailed:
    case Errc::ContainerWriteFailed:
    case Errc::Unavailable:
      return 503;
    case Errc::BackendFailure:
    case Errc::InvariantViolation:
      return 500;
  }
  return 500;
}

void write_error(httplib::Response& res, const Error& e) {
  res.status = http_status_for(e.code());
  res.set_header("X-Dyn-Error", std::string(errc_name(e.code())));
  res.set_content(Json{{"error", errc_name(e.code())}, {"message", e.what()}}.dump(), "application/json");
}

void guarded(httplib::Response& res, const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    write_error(res, e);
  } catch (const Json::exception& e) {
    write_error(res, Error(Errc::BadRequest, e.what()));
  } catch (const std::exception& e) {
    write_error(res, Error(Errc::BackendFailure, e.what()));
  }
}

void throw_remote(const httplib::Result& result, std::string_view what) {
  if (!result) {
    throw Error(Errc::Unavailable, std::string(what) + ": " + httplib::to_string(result.error()));
  }
  std::string name = result->get_header_value("X-Dyn-Error");
  std::string message = result->body;
  if (name.empty() && !result->body.empty()) {
    try {
      auto j = Json::parse(result->body);
      name = j.value("error", "");
      message = j.value("message", message);
    } catch (const Json::exception&) {
    }
  } else if (!result->body.empty()) {
    try {
      message = Json::parse(result->body).value("message", message);
    } catch (const Json::exception&) {
    }
  }
  if (auto code = errc_from_name(name)) throw Error(*code, message);
  if (result->status == 404) throw Error(Errc::NotFound, std::string(what));
  if (result->status == 401) throw Error(Errc::Unauthorized, std::string(what));
  throw Error(Errc::Unavailable, std::string(what) + ": HTTP " + std::to_string(result->status));
}

const httplib::Response& expect_ok(const httplib::Result& result, std::string_view what) {
  if (!result || result->status < 200 || result->status >= 300) throw_remote(result, what);
  return *result;
}

std::string bearer_token(const httplib::Request& req) {
  auto h = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (h.size() <= kPrefix.size() || h.compare(0, kPrefix.size(), kPrefix) != 0) return {};
  return h.substr(kPrefix.size());
}

httplib::Headers auth_headers(const std::string& token) { return {{"Authorization", "Bearer " + token}}; }

std::unique_ptr<httplib::Client> make_client(const std::string& endpoint, const ClientOptions& options) {
  std::string url = endpoint;
  if (url.rfind("http://", 0) != 0) url = "http://" + url;
  auto cli = std::make_unique<httplib::Client>(url);
  auto secs = [](std::chrono::milliseconds ms) {
    return std::pair<time_t, time_t>(ms.count() / 1000, (ms.count() % 1000) * 1000);
  };
  auto [cs, cus] = secs(options.connect_timeout);
  auto [ios, ious] = secs(options.io_timeout);
  cli->set_connection_timeout(cs, cus);
  cli->set_read_timeout(ios, ious);
  cli->set_write_timeout(ios, ious);
  cli->set_keep_alive(true);
  // Callers percent-encode paths themselves (encode_path).
  cli->set_url_encode(false);
  return cli;
}

std::string encode_path(std::string_view path) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : path) {
    if (std::isalnum(c) || c == '/' || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

HttpServer::HttpServer(std::string host, int port) : host_(std::move(host)), port_(port) {
  server_.set_payload_max_length(std::numeric_limits<std::size_t>::max());
  server_.set_pre_routing_handler([this](const httplib::Request&, httplib::Response&) {
    if (latency_.count() > 0) std::this_thread::sleep_for(latency_);
    return httplib::Server::HandlerResponse::Unhandled;
  });
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::set_injected_latency(std::chrono::milliseconds latency) { latency_ = latency; }

void HttpServer::start() {
  if (port_ == 0) {
    port_ = server_.bind_to_any_port(host_);
  } else if (!server_.bind_to_port(host_, port_)) {
    port_ = -1;
  }
  if (port_ <= 0) throw Error(Errc::Unavailable, "cannot bind " + host_);
  thread_ = std::thread([this] { server_.listen_after_bind(); });
  server_.wait_until_ready();
}

void HttpServer::stop() {
  if (thread_.joinable()) {
    server_.stop();
    thread_.join();
  }
}

std::string HttpServer::endpoint() const { return "http://" + host_ + ":" + std::to_string(port_); }

}  // namespace dynostore::net

namespace dynostore::net {

ClientPool::ClientPool(std::string endpoint, ClientOptions options)
    : endpoint_(std::move(endpoint)), options_(options) {}

ClientPool::Lease ClientPool::borrow() {
  {
    std::lock_guard lock(mu_);
    if (!idle_.empty()) {
      auto c = std::move(idle_.back());
      idle_.pop_back();
      return Lease(*this, std::move(c));
    }
  }
  return Lease(*this, make_client(endpoint_, options_));
}

void ClientPool::give_back(std::unique_ptr<httplib::Client> client) {
  if (!client) return;
  std::lock_guard lock(mu_);
  if (idle_.size() < 16) idle_.push_back(std::move(client));
}

}  // namespace dynostore::net
