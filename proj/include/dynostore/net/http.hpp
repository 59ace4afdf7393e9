#pragma once

// HTTP plumbing shared by every service: a background-thread server wrapper,
// error <-> status mapping, and client construction. Only .cpp files include
// this header (it pulls in cpp-httplib).

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include "httplib.h"

#include "dynostore/domain/error.hpp"
#include "dynostore/domain/json.hpp"

namespace dynostore::net {

int http_status_for(Errc code) noexcept;

// Serialises an error as {"error": "<Errc name>", "message": "..."}.
void write_error(httplib::Response& res, const Error& e);

// Runs `body`, translating Error / JSON failures / anything else into an
// error response.
void guarded(httplib::Response& res, const std::function<void()>& body);

// Rebuilds the Error a peer reported, or Unavailable when the transport failed.
[[noreturn]] void throw_remote(const httplib::Result& result, std::string_view what);
// Throws unless the result carries a 2xx status.
const httplib::Response& expect_ok(const httplib::Result& result, std::string_view what);

std::string bearer_token(const httplib::Request& req);
httplib::Headers auth_headers(const std::string& token);

struct ClientOptions {
  std::chrono::milliseconds connect_timeout{2000};
  std::chrono::milliseconds io_timeout{30000};
};

// Percent-encodes everything but unreserved characters and '/'.
std::string encode_path(std::string_view path);

// Accepts "http://host:port" or "host:port".
std::unique_ptr<httplib::Client> make_client(const std::string& endpoint, const ClientOptions& options = {});

class HttpServer {
 public:
  explicit HttpServer(std::string host = "127.0.0.1", int port = 0);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  httplib::Server& routes() { return server_; }
  // Delay applied to every request before routing (latency injection).
  void set_injected_latency(std::chrono::milliseconds latency);

  void start();
  void stop();
  int port() const { return port_; }
  std::string endpoint() const;

 private:
  httplib::Server server_;
  std::string host_;
  int port_;
  std::thread thread_;
  std::chrono::milliseconds latency_{0};
};

}  // namespace dynostore::net

namespace dynostore::net {

// Reusable keep-alive connections to one endpoint; each concurrent caller
// borrows its own client.
class ClientPool {
 public:
  explicit ClientPool(std::string endpoint, ClientOptions options = {});

  class Lease {
   public:
    Lease(ClientPool& pool, std::unique_ptr<httplib::Client> client) : pool_(pool), client_(std::move(client)) {}
    ~Lease() { pool_.give_back(std::move(client_)); }
    Lease(const Lease&) = delete;
    Lease& operator=(const Lease&) = delete;
    httplib::Client* operator->() { return client_.get(); }
    httplib::Client& operator*() { return *client_; }

   private:
    ClientPool& pool_;
    std::unique_ptr<httplib::Client> client_;
  };

  Lease borrow();
  const std::string& endpoint() const { return endpoint_; }

 private:
  void give_back(std::unique_ptr<httplib::Client> client);

  std::string endpoint_;
  ClientOptions options_;
  std::mutex mu_;
  std::vector<std::unique_ptr<httplib::Client>> idle_;
};

}  // namespace dynostore::net
