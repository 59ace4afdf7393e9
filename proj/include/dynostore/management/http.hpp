#pragma once

#include <memory>
#include <string>

#include "dynostore/management/gateway.hpp"

namespace dynostore::net {
class HttpServer;
}

namespace dynostore::management {

// Public entry point of the store. Bearer token on every route except
// POST /auth/token.
//   POST   /auth/token            {"user","password"} -> {"token","expiry"}
//   PUT    /objects/{path}        body = object; ?mode=&n=&k=&target_loss=
//   GET    /objects/{path}        ?version= -> object bytes
//   HEAD   /objects/{path}        200 / 404
//   DELETE /objects/{path}
//   POST   /containers            {"endpoint"} -> {"id"}        (admin)
//   DELETE /containers/{id}                                      (admin)
//   GET    /containers            -> [ContainerState]
//   GET    /health                -> {"status","healthy","containers"}
//   POST   /namespaces, /collections -> {"id"}                 (forwarded)
//   GET    /collections?id=       -> {"path"}                    (forwarded)
//   POST   /permissions                                          (forwarded)
//   POST   /gc                    -> [descriptors]              (admin)
// Object responses carry X-Dyn-Version, X-Dyn-Object-Hash, X-Dyn-Uuid and,
// when set, X-Dyn-Client-Tag; uploads accept X-Dyn-Client-Tag.
class GatewayServer {
 public:
  GatewayServer(Gateway& gateway, const AuthService& auth, std::string host = "127.0.0.1", int port = 0);
  ~GatewayServer();

  void set_injected_latency(std::chrono::milliseconds latency);
  void start();
  void stop();
  std::string endpoint() const;

 private:
  Gateway& gateway_;
  const AuthService& auth_;
  std::unique_ptr<net::HttpServer> server_;
};

}  // namespace dynostore::management
