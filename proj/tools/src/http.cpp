#include "eclosure_tools/http.hpp"

#include "httplib.h"

namespace eclosure::tools {

struct HttpFrontend::Impl {
  SessionService& service;
  httplib::Server server;
};

namespace {

constexpr const char* kJson = "application/json";

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

template <class F>
void handle(httplib::Response& res, F&& f, int ok_status = 200) {
  try {
    reply(res, ok_status, f());
  } catch (const ApiError& e) {
    reply(res, e.http_status(), e.body());
  } catch (const std::exception& e) {
    reply(res, 500, Json{{"code", "internal"}, {"message", e.what()}});
  }
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error&) {
    throw ApiError(ApiError::Code::bad_request, "request body is not valid JSON");
  }
}

}  // namespace

HttpFrontend::HttpFrontend(SessionService& service) : impl_(new Impl{service, {}}) {
  auto& svc = impl_->service;
  auto& srv = impl_->server;
  srv.Post("/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] { return svc.create(parse_body(req)); }, 201);
  });
  srv.Get("/sessions", [&svc](const httplib::Request&, httplib::Response& res) {
    handle(res, [&] { return svc.list(); });
  });
  srv.Get(R"(/sessions/([0-9a-f]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] { return svc.get(req.matches[1]); });
  });
  srv.Get(R"(/sessions/([0-9a-f]+)/audit)",
          [&svc](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] { return svc.audit(req.matches[1]); });
          });
  srv.Get(R"(/sessions/([0-9a-f]+)/bound)",
          [&svc](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] { return svc.bound(req.matches[1], req.get_param_value("set")); });
          });
  srv.Post(R"(/sessions/([0-9a-f]+)/(membership|switch-loss|alpha|finalize))",
           [&svc](const httplib::Request& req, httplib::Response& res) {
             handle(res, [&] {
               const std::string id = req.matches[1];
               const std::string op = req.matches[2];
               const Json body = parse_body(req);
               if (op == "membership") return svc.membership(id, body);
               if (op == "switch-loss") return svc.switch_loss(id, body);
               if (op == "alpha") return svc.set_alpha(id, body);
               return svc.finalize(id, body);
             });
           });
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(Json{{"code", "not_found"}, {"message", "no such route"}}.dump(), kJson);
    }
  });
}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpFrontend::run() { return impl_->server.listen_after_bind(); }

void HttpFrontend::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace eclosure::tools
