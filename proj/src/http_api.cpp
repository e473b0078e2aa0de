#include "curtail/http_api.hpp"

#include <cstdlib>
#include <stdexcept>

#include "httplib.h"

#include "curtail/errors.hpp"

namespace curtail {

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& msg) {
    send_json(res, status, {{"error", {{"kind", kind}, {"message", msg}}}});
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json body = json::parse(req.body);  // parse_error maps to 400
    if (!body.is_object()) throw DomainError("request body must be a JSON object");
    return body;
}

std::optional<std::uint64_t> expected_seq_of(const json& body) {
    if (!body.contains("expected_seq") || body.at("expected_seq").is_null()) return std::nullopt;
    const auto& v = body.at("expected_seq");
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw DomainError("expected_seq must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::string decision_message(const RecordResult& r) {
    switch (r.decision) {
        case StageDecision::StopEfficacy: return "stop: efficacy threshold reached";
        case StageDecision::StopFutility: return "stop: efficacy threshold no longer reachable";
        case StageDecision::Continue: break;
    }
    return "continue: " + std::to_string(r.responders_needed) + " responders needed for success";
}

template <class F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const NotFoundError& e) {
            send_error(res, 404, "not_found", e.what());
        } catch (const VersionConflictError& e) {
            send_error(res, 409, "version_conflict", e.what());
        } catch (const ConflictError& e) {
            send_error(res, 409, "conflict", e.what());
        } catch (const DomainError& e) {
            send_error(res, 400, "validation", e.what());
        } catch (const SearchExhaustedError& e) {
            send_error(res, 400, "design_search", e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, "validation", e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "internal", e.what());
        }
    };
}

}  // namespace

ServiceConfig config_from_env(ServiceConfig cfg) {
    if (const char* listen = std::getenv("CURTAIL_LISTEN"); listen && *listen) {
        const std::string s(listen);
        const auto colon = s.rfind(':');
        try {
            if (colon == std::string::npos) {
                cfg.port = std::stoi(s);
            } else {
                if (colon > 0) cfg.host = s.substr(0, colon);
                cfg.port = std::stoi(s.substr(colon + 1));
            }
        } catch (const std::exception&) {
            throw DomainError("CURTAIL_LISTEN must be host:port or port, got '" + s + "'");
        }
        if (cfg.port < 0 || cfg.port > 65535) throw DomainError("port out of range");
    }
    if (const char* dir = std::getenv("CURTAIL_DATA_DIR"); dir && *dir) cfg.data_dir = dir;
    if (const char* dir = std::getenv("CURTAIL_STATIC_DIR"); dir && *dir) cfg.static_dir = dir;
    return cfg;
}

HttpService::HttpService(TrialStore& store, std::optional<std::filesystem::path> static_dir)
    : store_(store), server_(std::make_unique<httplib::Server>()) {
    server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                  {"Access-Control-Allow-Headers", "Content-Type"},
                                  {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
    if (static_dir && !server_->set_mount_point("/", static_dir->string())) {
        throw DomainError("static directory '" + static_dir->string() + "' does not exist");
    }
    routes();
}

HttpService::~HttpService() = default;

void HttpService::routes() {
    auto& srv = *server_;
    auto& store = store_;

    srv.Options(R"(/sessions.*)", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
    });

    srv.Post("/sessions", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const auto session = store.create(hypotheses_from_json(parse_body(req)));
        send_json(res, 201, to_json(session));
    }));

    srv.Get("/sessions", guarded([&store](const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        for (const auto& s : store.list()) out.push_back(to_json(s));
        send_json(res, 200, out);
    }));

    srv.Get(R"(/sessions/([^/]+))",
            guarded([&store](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, to_json(store.get(req.matches[1])));
            }));

    srv.Post(R"(/sessions/([^/]+)/outcomes)",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
                 const auto body = parse_body(req);
                 if (!body.contains("responder") || !body.at("responder").is_boolean()) {
                     throw DomainError("responder must be a boolean");
                 }
                 const auto r = store.record_outcome(req.matches[1], body.at("responder").get<bool>(),
                                                     expected_seq_of(body));
                 send_json(res, 200,
                           {{"decision", std::string(to_string(r.decision))},
                            {"responders_needed", r.responders_needed},
                            {"message", decision_message(r)},
                            {"session", to_json(r.session)}});
             }));

    srv.Delete(R"(/sessions/([^/]+)/outcomes/last)",
               guarded([&store](const httplib::Request& req, httplib::Response& res) {
                   json body = parse_body(req);
                   if (req.has_param("expected_seq")) {
                       try {
                           body["expected_seq"] = std::stoll(req.get_param_value("expected_seq"));
                       } catch (const std::exception&) {
                           throw DomainError("expected_seq must be a non-negative integer");
                       }
                   }
                   send_json(res, 200,
                             to_json(store.undo_outcome(req.matches[1], expected_seq_of(body))));
               }));

    srv.Post(R"(/sessions/([^/]+)/finalize)",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 const auto report = store.finalize(id);
                 send_json(res, 200, {{"report", to_json(report)}, {"session", to_json(store.get(id))}});
             }));

    srv.Get(R"(/sessions/([^/]+)/boundaries)",
            guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const auto s = store.get(req.matches[1]);
                send_json(res, 200, boundary_table(s.design));
            }));
}

int HttpService::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = server_->bind_to_any_port(host);
        if (bound < 0) throw std::runtime_error("could not bind to " + host);
        return bound;
    }
    if (!server_->bind_to_port(host, port)) {
        throw std::runtime_error("could not bind to " + host + ":" + std::to_string(port));
    }
    return port;
}

void HttpService::listen() { server_->listen_after_bind(); }

void HttpService::stop() { server_->stop(); }

}  // namespace curtail
