#include "dynostore/metadata/http.hpp"

#include "dynostore/net/http.hpp"

namespace dynostore::metadata {

namespace {

void reply(httplib::Response& res, const Json& body) { res.set_content(body.dump(), "application/json"); }

ObjectPath path_param(const httplib::Request& req, const char* name = "path") {
  if (!req.has_param(name)) throw Error(Errc::BadRequest, std::string("missing query parameter ") + name);
  return ObjectPath::parse(req.get_param_value(name));
}

std::string encode_query(const std::string& value) { return httplib::detail::encode_query_param(value); }

}  // namespace

MetadataServer::MetadataServer(MetadataService& service, std::shared_ptr<Replica> replica,
                               const management::TokenAuthority& auth, std::string host, int port)
    : service_(service),
      replica_(std::move(replica)),
      auth_(auth),
      server_(std::make_unique<net::HttpServer>(std::move(host), port)) {
  auto& r = server_->routes();
  using Req = httplib::Request;
  using Res = httplib::Response;

  r.Post("/namespaces", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      const auto id = service_.create_namespace(parse_json(req.body).at("user").get<std::string>(), net::bearer_token(req));
      res.status = 201;
      reply(res, Json{{"id", id}});
    });
  });
  r.Post("/collections", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      const auto id = service_.create_collection(parse_json(req.body).at("path").get<ObjectPath>(), net::bearer_token(req));
      res.status = 201;
      reply(res, Json{{"id", id}});
    });
  });
  r.Get("/collections", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      if (!req.has_param("id")) throw Error(Errc::BadRequest, "missing query parameter id");
      const auto path = service_.collection_path(Uuid::parse(req.get_param_value("id")), net::bearer_token(req));
      reply(res, Json{{"path", path}});
    });
  });
  r.Post("/objects", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      auto body = parse_json(req.body);
      auto d = service_.register_object(body.at("path").get<ObjectPath>(),
                                        body.at("descriptor").get<ObjectDescriptor>(), net::bearer_token(req));
      res.status = 201;
      reply(res, d);
    });
  });
  r.Get("/objects", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      std::optional<std::uint32_t> version;
      if (req.has_param("version")) version = static_cast<std::uint32_t>(std::stoul(req.get_param_value("version")));
      reply(res, service_.resolve(path_param(req), version, net::bearer_token(req)));
    });
  });
  r.Get("/objects/history", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      Json out = Json::array();
      for (const auto& v : service_.history(path_param(req), net::bearer_token(req))) {
        out.push_back(Json{{"descriptor", v.descriptor}, {"expired", v.expired}, {"superseded_at", v.superseded_at}});
      }
      reply(res, out);
    });
  });
  r.Delete("/objects", [this](const Req& req, Res& res) {
    net::guarded(res, [&] { reply(res, service_.evict(path_param(req), net::bearer_token(req))); });
  });
  r.Post("/permissions", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      service_.grant(parse_json(req.body).get<Permission>(), net::bearer_token(req));
      res.status = 201;
    });
  });
  r.Get("/permissions/check", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      bool allowed = service_.check(path_param(req), req.get_param_value("user"),
                                    parse_mode(req.get_param_value("mode")), net::bearer_token(req));
      reply(res, Json{{"allowed", allowed}});
    });
  });
  r.Post("/retention", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      auto body = parse_json(req.body);
      service_.set_retention(body.at("path").get<ObjectPath>(), body.at("days").get<std::uint32_t>(),
                             net::bearer_token(req));
    });
  });
  r.Post("/gc", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      reply(res, service_.garbage_collect(parse_json(req.body).at("now").get<std::int64_t>(), net::bearer_token(req)));
    });
  });
  r.Get("/list", [this](const Req& req, Res& res) {
    net::guarded(res, [&] { reply(res, service_.list(path_param(req, "prefix"), net::bearer_token(req))); });
  });

  auto internal = [this](auto handler) {
    return [this, handler](const Req& req, Res& res) {
      net::guarded(res, [&] {
        auth_.require(net::bearer_token(req), Mode::Admin);
        handler(req, res);
      });
    };
  };
  r.Post("/internal/propose", internal([this](const Req& req, Res& res) {
           reply(res, replica_->on_propose(parse_json(req.body).get<Proposal>()));
         }));
  r.Post("/internal/commit", internal([this](const Req& req, Res& res) {
           auto result = replica_->on_commit(parse_json(req.body).get<Proposal>());
           reply(res, Json{{"result", commit_result_name(result)}});
         }));
  r.Post("/internal/abort", internal([this](const Req& req, Res& res) {
           replica_->on_abort(parse_json(req.body).get<Proposal>());
           reply(res, Json::object());
         }));
  r.Post("/internal/read", internal([this](const Req& req, Res& res) {
           reply(res, replica_->read_many(parse_json(req.body).at("keys").get<std::vector<std::string>>()));
         }));
  r.Post("/internal/scan", internal([this](const Req& req, Res& res) {
           reply(res, replica_->scan(parse_json(req.body).at("prefix").get<std::string>()));
         }));
  r.Get("/internal/log", internal([this](const Req& req, Res& res) {
          std::uint64_t since = req.has_param("since") ? std::stoull(req.get_param_value("since")) : 0;
          reply(res, replica_->log_since(since));
        }));
  r.Post("/internal/log", internal([this](const Req& req, Res& res) {
           reply(res, replica_->log_for_key(parse_json(req.body).at("key").get<std::string>()));
         }));
  r.Post("/internal/absorb", internal([this](const Req& req, Res& res) {
           auto applied = replica_->absorb(parse_json(req.body).at("entries").get<std::vector<LogEntry>>());
           reply(res, Json{{"applied", applied}});
         }));
}

MetadataServer::~MetadataServer() { stop(); }

void MetadataServer::enable_anti_entropy(std::shared_ptr<AntiEntropy> anti_entropy,
                                         std::chrono::milliseconds interval) {
  anti_entropy_ = std::move(anti_entropy);
  interval_ = interval;
}

void MetadataServer::start() {
  server_->start();
  if (!anti_entropy_ || sync_thread_.joinable()) return;
  stopping_ = false;
  sync_thread_ = std::thread([this] {
    std::unique_lock lock(mu_);
    while (!cv_.wait_for(lock, interval_, [this] { return stopping_; })) {
      lock.unlock();
      try {
        anti_entropy_->run_once();
      } catch (const std::exception&) {
        // Retried on the next tick.
      }
      lock.lock();
    }
  });
}

void MetadataServer::stop() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (sync_thread_.joinable()) sync_thread_.join();
  server_->stop();
}

std::string MetadataServer::endpoint() const { return server_->endpoint(); }

MetadataClient::MetadataClient(std::vector<std::string> endpoints) {
  if (endpoints.empty()) throw Error(Errc::InvalidParams, "metadata client needs an endpoint");
  for (auto& e : endpoints) pools_.push_back(std::make_unique<net::ClientPool>(std::move(e)));
}

MetadataClient::~MetadataClient() = default;

Json MetadataClient::call(Method method, const std::string& route, const std::string& token, const Json& body) {
  const std::size_t start = preferred_.load();
  for (std::size_t attempt = 0; attempt < pools_.size(); ++attempt) {
    const std::size_t i = (start + attempt) % pools_.size();
    auto client = pools_[i]->borrow();
    httplib::Result res;
    const auto headers = net::auth_headers(token);
    switch (method) {
      case Method::Get: res = client->Get(route, headers); break;
      case Method::Post: res = client->Post(route, headers, body.dump(), "application/json"); break;
      case Method::Delete: res = client->Delete(route, headers); break;
    }
    if (!res) continue;  // node unreachable: fail over
    preferred_ = i;
    const auto& ok = net::expect_ok(res, route);
    return ok.body.empty() ? Json() : parse_json(ok.body);
  }
  throw Error(Errc::Unavailable, "no metadata node reachable");
}

Uuid MetadataClient::create_namespace(const UserId& user, const std::string& token) {
  return call(Method::Post, "/namespaces", token, Json{{"user", user}}).at("id").get<Uuid>();
}

Uuid MetadataClient::create_collection(const ObjectPath& path, const std::string& token) {
  return call(Method::Post, "/collections", token, Json{{"path", path}}).at("id").get<Uuid>();
}

ObjectPath MetadataClient::collection_path(const Uuid& id, const std::string& token) {
  return call(Method::Get, "/collections?id=" + id.to_string(), token).at("path").get<ObjectPath>();
}

ObjectDescriptor MetadataClient::register_object(const ObjectPath& path, ObjectDescriptor descriptor,
                                                 const std::string& token) {
  return call(Method::Post, "/objects", token, Json{{"path", path}, {"descriptor", descriptor}})
      .get<ObjectDescriptor>();
}

ObjectDescriptor MetadataClient::resolve(const ObjectPath& path, std::optional<std::uint32_t> version,
                                         const std::string& token) {
  std::string route = "/objects?path=" + encode_query(path.str());
  if (version) route += "&version=" + std::to_string(*version);
  return call(Method::Get, route, token).get<ObjectDescriptor>();
}

std::vector<VersionEntry> MetadataClient::history(const ObjectPath& path, const std::string& token) {
  std::vector<VersionEntry> out;
  for (const auto& v : call(Method::Get, "/objects/history?path=" + encode_query(path.str()), token)) {
    out.push_back(VersionEntry{v.at("descriptor").get<ObjectDescriptor>(), v.at("expired").get<bool>(),
                               v.at("superseded_at").get<std::int64_t>()});
  }
  return out;
}

void MetadataClient::grant(const Permission& permission, const std::string& token) {
  call(Method::Post, "/permissions", token, permission);
}

bool MetadataClient::check(const ObjectPath& path, const UserId& user, Mode mode, const std::string& token) {
  auto route = "/permissions/check?path=" + encode_query(path.str()) + "&user=" + encode_query(user) +
               "&mode=" + std::string(mode_name(mode));
  return call(Method::Get, route, token).at("allowed").get<bool>();
}

std::vector<ObjectDescriptor> MetadataClient::evict(const ObjectPath& path, const std::string& token) {
  return call(Method::Delete, "/objects?path=" + encode_query(path.str()), token)
      .get<std::vector<ObjectDescriptor>>();
}

void MetadataClient::set_retention(const ObjectPath& path, std::uint32_t days, const std::string& token) {
  call(Method::Post, "/retention", token, Json{{"path", path}, {"days", days}});
}

std::vector<ObjectDescriptor> MetadataClient::garbage_collect(std::int64_t now_ms, const std::string& token) {
  return call(Method::Post, "/gc", token, Json{{"now", now_ms}}).get<std::vector<ObjectDescriptor>>();
}

std::vector<ObjectDescriptor> MetadataClient::list(const ObjectPath& prefix, const std::string& token) {
  return call(Method::Get, "/list?prefix=" + encode_query(prefix.str()), token).get<std::vector<ObjectDescriptor>>();
}

}  // namespace dynostore::metadata
