#include "dynostore/management/http.hpp"

#include "dynostore/container/http.hpp"
#include "dynostore/net/http.hpp"

namespace dynostore::management {

namespace {

using Req = httplib::Request;
using Res = httplib::Response;

void reply(Res& res, const Json& body) { res.set_content(body.dump(), "application/json"); }

ObjectPath object_path(const Req& req) { return ObjectPath::parse(req.matches[1].str()); }

std::optional<std::uint32_t> version_param(const Req& req) {
  if (!req.has_param("version")) return std::nullopt;
  try {
    return static_cast<std::uint32_t>(std::stoul(req.get_param_value("version")));
  } catch (const std::exception&) {
    throw Error(Errc::BadRequest, "bad version '" + req.get_param_value("version") + "'");
  }
}

UploadOptions upload_options(const Req& req) {
  UploadOptions o;
  try {
    if (req.has_param("mode")) o.mode = parse_upload_mode(req.get_param_value("mode"));
    if (req.has_param("n")) o.n = static_cast<std::uint16_t>(std::stoul(req.get_param_value("n")));
    if (req.has_param("k")) o.k = static_cast<std::uint16_t>(std::stoul(req.get_param_value("k")));
    if (req.has_param("target_loss")) o.target_loss = std::stod(req.get_param_value("target_loss"));
  } catch (const std::logic_error&) {
    throw Error(Errc::BadRequest, "malformed upload parameters");
  }
  if ((o.n || o.k || o.target_loss) && !req.has_param("mode")) o.mode = UploadMode::Resilient;
  o.client_tag = req.get_header_value("X-Dyn-Client-Tag");
  return o;
}

void describe_headers(Res& res, const ObjectDescriptor& d) {
  res.set_header("X-Dyn-Version", std::to_string(d.version));
  res.set_header("X-Dyn-Uuid", d.object_uuid.to_string());
  res.set_header("X-Dyn-Object-Hash", to_hex(d.object_hash));
  if (!d.client_tag.empty()) res.set_header("X-Dyn-Client-Tag", d.client_tag);
}

}  // namespace

GatewayServer::GatewayServer(Gateway& gateway, const AuthService& auth, std::string host, int port)
    : gateway_(gateway), auth_(auth), server_(std::make_unique<net::HttpServer>(std::move(host), port)) {
  auto& r = server_->routes();
  const std::string object_route = R"(/objects(/.+))";

  r.Post("/auth/token", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      auto body = parse_json(req.body);
      auto token = auth_.authenticate(body.at("user").get<std::string>(), body.at("password").get<std::string>());
      reply(res, Json{{"token", token.encode()}, {"expiry", token.expiry}});
    });
  });

  r.Put(object_route, [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      auto d = gateway_.upload(object_path(req), as_bytes(req.body), upload_options(req), net::bearer_token(req));
      describe_headers(res, d);
      res.status = 201;
      reply(res, d);
    });
  });
  // HEAD is routed through the GET table.
  r.Get(object_route, [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      const auto token = net::bearer_token(req);
      if (req.method == "HEAD") {
        describe_headers(res, gateway_.describe(object_path(req), version_param(req), token));
        return;
      }
      ObjectDescriptor d;
      auto bytes = gateway_.download(object_path(req), version_param(req), token, nullptr, &d);
      describe_headers(res, d);
      res.set_content(std::string(as_chars(bytes)), "application/octet-stream");
    });
  });
  r.Delete(object_route, [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      gateway_.evict(object_path(req), net::bearer_token(req));
      res.status = 204;
    });
  });

  r.Post("/containers", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      const auto token = net::bearer_token(req);
      gateway_.authorize(token, Mode::Admin);
      const auto endpoint = parse_json(req.body).at("endpoint").get<std::string>();
      auto store = std::make_shared<container::HttpChunkStore>(endpoint);
      auto state = store->status();
      state.endpoint = endpoint;
      auto id = gateway_.register_container(state, std::move(store), token);
      res.status = 201;
      reply(res, Json{{"id", id}});
    });
  });
  r.Delete(R"(/containers/([^/]+))", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      gateway_.deregister_container(Uuid::parse(req.matches[1].str()), net::bearer_token(req));
      res.status = 204;
    });
  });
  r.Get("/containers", [this](const Req& req, Res& res) {
    net::guarded(res, [&] { reply(res, gateway_.containers(net::bearer_token(req))); });
  });
  r.Get("/health", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      auto states = gateway_.containers(net::bearer_token(req));
      const auto healthy = std::count_if(states.begin(), states.end(), [](const auto& s) { return s.healthy; });
      reply(res, Json{{"status", "ok"}, {"healthy", healthy}, {"containers", states.size()}});
    });
  });

  r.Post("/namespaces", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      const auto id =
          gateway_.metadata().create_namespace(parse_json(req.body).at("user").get<std::string>(), net::bearer_token(req));
      res.status = 201;
      reply(res, Json{{"id", id}});
    });
  });
  r.Post("/collections", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      const auto id = gateway_.metadata().create_collection(parse_json(req.body).at("path").get<ObjectPath>(),
                                                            net::bearer_token(req));
      res.status = 201;
      reply(res, Json{{"id", id}});
    });
  });
  r.Get("/collections", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      if (!req.has_param("id")) throw Error(Errc::BadRequest, "missing query parameter id");
      const auto path =
          gateway_.metadata().collection_path(Uuid::parse(req.get_param_value("id")), net::bearer_token(req));
      reply(res, Json{{"path", path}});
    });
  });
  r.Post("/permissions", [this](const Req& req, Res& res) {
    net::guarded(res, [&] {
      gateway_.metadata().grant(parse_json(req.body).get<Permission>(), net::bearer_token(req));
      res.status = 201;
    });
  });
  r.Post("/gc", [this](const Req& req, Res& res) {
    net::guarded(res, [&] { reply(res, gateway_.garbage_collect(net::bearer_token(req))); });
  });
}

GatewayServer::~GatewayServer() { stop(); }

void GatewayServer::set_injected_latency(std::chrono::milliseconds latency) { server_->set_injected_latency(latency); }
void GatewayServer::start() { server_->start(); }
void GatewayServer::stop() { server_->stop(); }
std::string GatewayServer::endpoint() const { return server_->endpoint(); }

}  // namespace dynostore::management
