#include "tracetable/http.hpp"

#include <httplib.h>

#include <charconv>
#include <functional>

namespace tracetable {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, json{{"error", message}}, status);
}

using Handler = std::function<json(const httplib::Request&)>;

httplib::Server::Handler guarded(Handler handler) {
  return [handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
    try {
      send_json(res, handler(req));
    } catch (const ServiceError& e) {
      send_error(res, e.status(), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("bad request: ") + e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

json body_of(const httplib::Request& req) {
  json body = json::parse(req.body);
  if (!body.is_object()) throw ServiceError(400, "request body must be a JSON object");
  return body;
}

template <typename T>
T required(const json& body, const char* key) {
  if (!body.contains(key)) throw ServiceError(400, std::string("missing field \"") + key + "\"");
  return body.at(key).get<T>();
}

std::size_t size_param(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string value = req.get_param_value(key);
  std::size_t n = 0;
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
  if (ec == std::errc{} && end == value.data() + value.size() && !value.empty()) return n;
  throw ServiceError(400, std::string("query parameter \"") + key + "\" must be a non-negative integer");
}

}  // namespace

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {}

  Service& service;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  Service& svc = impl_->service;

  srv.Get("/exercises", guarded([&svc](const httplib::Request&) { return svc.list_exercises(); }));

  srv.Get(R"(/exercises/([^/]+))", guarded([&svc](const httplib::Request& req) {
            std::optional<std::string> learner;
            if (req.has_param("learner")) learner = req.get_param_value("learner");
            return svc.get_exercise(req.matches[1], learner);
          }));

  srv.Get(R"(/exercises/([^/]+)/replay)", guarded([&svc](const httplib::Request& req) {
            std::optional<Direction> dir;
            if (req.has_param("dir")) {
              const std::string d = req.get_param_value("dir");
              if (d == "forward") {
                dir = Direction::Forward;
              } else if (d == "backward") {
                dir = Direction::Backward;
              } else {
                throw ServiceError(400, "dir must be forward or backward");
              }
            }
            return svc.replay(req.matches[1], size_param(req, "choice", 0), size_param(req, "cursor", 1), dir);
          }));

  srv.Post("/attempts/selection", guarded([&svc](const httplib::Request& req) {
             const json body = body_of(req);
             return svc.submit_selection(required<std::string>(body, "learner"),
                                         required<std::string>(body, "exerciseId"),
                                         required<std::int64_t>(body, "choiceIndex"));
           }));

  srv.Post("/attempts/fillin", guarded([&svc](const httplib::Request& req) {
             const json body = body_of(req);
             return svc.submit_fill_in(required<std::string>(body, "learner"),
                                       required<std::string>(body, "exerciseId"), required<json>(body, "answers"));
           }));

  srv.Post("/attempts/ordering", guarded([&svc](const httplib::Request& req) {
             const json body = body_of(req);
             return svc.submit_ordering(required<std::string>(body, "learner"), required<std::string>(body, "testId"),
                                        required<std::vector<std::string>>(body, "arrangement"));
           }));

  srv.Get(R"(/learners/([^/]+)/stats)", guarded([&svc](const httplib::Request& req) {
            const std::string learner = req.matches[1];
            json sessions = json::array();
            for (const auto& s : svc.session_stats(learner)) sessions.push_back(to_json(s));
            return json{{"learner", learner}, {"sessions", std::move(sessions)}};
          }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace tracetable
