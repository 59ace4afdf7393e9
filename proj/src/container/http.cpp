#include "dynostore/container/http.hpp"

#include "dynostore/net/http.hpp"

namespace dynostore::container {

ContainerServer::ContainerServer(ChunkStore& store, std::string host, int port)
    : store_(store), server_(std::make_unique<net::HttpServer>(std::move(host), port)) {
  auto& r = server_->routes();
  const std::string chunk_route = R"(/chunks/([^/]+))";

  r.Put(chunk_route, [this](const httplib::Request& req, httplib::Response& res) {
    net::guarded(res, [&] {
      store_.put_chunk(ChunkKey::parse(req.matches[1].str()), as_bytes(req.body), net::bearer_token(req));
      res.status = 201;
    });
  });
  // cpp-httplib dispatches HEAD through the GET table.
  r.Get(chunk_route, [this](const httplib::Request& req, httplib::Response& res) {
    net::guarded(res, [&] {
      if (req.method == "HEAD") {
        if (!store_.exists_chunk(ChunkKey::parse(req.matches[1].str()), net::bearer_token(req))) {
          throw Error(Errc::NotFound, "no such chunk");
        }
        return;
      }
      auto bytes = store_.get_chunk(ChunkKey::parse(req.matches[1].str()), net::bearer_token(req));
      res.set_content(std::string(as_chars(bytes)), "application/octet-stream");
    });
  });
  r.Delete(chunk_route, [this](const httplib::Request& req, httplib::Response& res) {
    net::guarded(res, [&] {
      store_.delete_chunk(ChunkKey::parse(req.matches[1].str()), net::bearer_token(req));
      res.status = 204;
    });
  });
  r.Get(R"(/chunks)", [this](const httplib::Request& req, httplib::Response& res) {
    net::guarded(res, [&] {
      Json ids = Json::array();
      for (const auto& key : store_.list_chunks(net::bearer_token(req))) ids.push_back(key.str());
      res.set_content(ids.dump(), "application/json");
    });
  });
  r.Get(R"(/status)", [this](const httplib::Request&, httplib::Response& res) {
    net::guarded(res, [&] { res.set_content(Json(store_.status()).dump(), "application/json"); });
  });
}

ContainerServer::~ContainerServer() { stop(); }

void ContainerServer::start() { server_->start(); }
void ContainerServer::stop() { server_->stop(); }
std::string ContainerServer::endpoint() const { return server_->endpoint(); }

HttpChunkStore::HttpChunkStore(std::string endpoint, std::chrono::milliseconds timeout)
    : pool_(std::make_unique<net::ClientPool>(std::move(endpoint),
                                              net::ClientOptions{std::chrono::milliseconds(2000), timeout})) {}

HttpChunkStore::~HttpChunkStore() = default;

void HttpChunkStore::put_chunk(const ChunkKey& key, ByteView bytes, const std::string& token) {
  auto cli = pool_->borrow();
  auto res = cli->Put("/chunks/" + key.str(), net::auth_headers(token), std::string(as_chars(bytes)),
                      "application/octet-stream");
  net::expect_ok(res, "put chunk");
}

Bytes HttpChunkStore::get_chunk(const ChunkKey& key, const std::string& token) {
  auto cli = pool_->borrow();
  auto res = cli->Get("/chunks/" + key.str(), net::auth_headers(token));
  const auto& ok = net::expect_ok(res, "get chunk");
  return to_bytes(ok.body);
}

void HttpChunkStore::delete_chunk(const ChunkKey& key, const std::string& token) {
  auto cli = pool_->borrow();
  net::expect_ok(cli->Delete("/chunks/" + key.str(), net::auth_headers(token)), "delete chunk");
}

bool HttpChunkStore::exists_chunk(const ChunkKey& key, const std::string& token) {
  auto cli = pool_->borrow();
  auto res = cli->Head("/chunks/" + key.str(), net::auth_headers(token));
  if (res && res->status == 404 && res->get_header_value("X-Dyn-Error") == "NotFound") return false;
  if (res && res->status == 200) return true;
  net::throw_remote(res, "exists chunk");
}

ContainerState HttpChunkStore::status() {
  auto cli = pool_->borrow();
  const auto res = cli->Get("/status");
  return parse_json(net::expect_ok(res, "status").body).get<ContainerState>();
}

std::vector<ChunkKey> HttpChunkStore::list_chunks(const std::string& token) {
  auto cli = pool_->borrow();
  const auto res = cli->Get("/chunks", net::auth_headers(token));
  std::vector<ChunkKey> out;
  for (const auto& id : parse_json(net::expect_ok(res, "list chunks").body)) out.push_back(ChunkKey::parse(id.get<std::string>()));
  return out;
}

}  // namespace dynostore::container
