#pragma once

#include <memory>
#include <string>
#include <thread>

#include "forge/service.hpp"
#include "forge_tools/session.hpp"

namespace httplib {
class Server;
}

namespace forge::tools {

/// HTTP status for a module error name.
int http_status_for(const std::string& error_name);

/// JSON adapter over Service. Mutating requests are appended to the session
/// log as the equivalent CLI command, with the request's pinned timestamp.
class HttpServer {
public:
    HttpServer(Service& service, std::shared_ptr<PinnableClock> clock);
    ~HttpServer();

    /// Port 0 picks a free port. Returns false when binding fails.
    bool start(const std::string& host, int port);
    void stop();
    int port() const { return port_; }

private:
    void routes();

    Service& svc_;
    std::shared_ptr<PinnableClock> clock_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace forge::tools
