#pragma once

// HTTP/JSON front end for the trial store.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "curtail/trial_service.hpp"

namespace httplib {
class Server;
}

namespace curtail {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path data_dir;
    std::optional<std::filesystem::path> static_dir;
};

// CURTAIL_LISTEN (host:port or port), CURTAIL_DATA_DIR, CURTAIL_STATIC_DIR.
ServiceConfig config_from_env(ServiceConfig defaults = {});

class HttpService {
public:
    explicit HttpService(TrialStore& store, std::optional<std::filesystem::path> static_dir = {});
    ~HttpService();
    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    // Binds the socket; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void listen();
    void stop();

private:
    void routes();

    TrialStore& store_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace curtail
