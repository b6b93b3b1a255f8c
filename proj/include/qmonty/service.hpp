// service.hpp: session-oriented JSON API over the engine.
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "qmonty/engine.hpp"
#include "qmonty/lab.hpp"

namespace httplib {
class Server;
}

namespace qmonty {

using Clock = std::chrono::steady_clock;

struct ServiceConfig {
    std::chrono::seconds idle_timeout{3600};
    // Injectable for expiry tests.
    std::function<Clock::time_point()> clock = [] { return Clock::now(); };
};

struct ApiError {
    std::string code;  // rule_violation | invalid_input | not_found | wrong_stage
    std::string message;
    std::string detail;
};

int http_status(const std::string& code);

// Maps the active exception (call inside a catch block) to an ApiError.
ApiError api_error_from_current_exception();

struct ApiResponse {
    int status = 200;
    Json body;
};

struct SessionRecord;

class GameService {
public:
    explicit GameService(ServiceConfig config = {});
    ~GameService();

    // Transport-independent entry point. `query` holds URL query parameters.
    ApiResponse handle(const std::string& method, const std::string& path, const std::string& body,
                       const std::map<std::string, std::string>& query = {});

    // Registers the /api/v1 routes on an HTTP server.
    void mount(httplib::Server& server);

    // Drops sessions idle for longer than the timeout; returns how many.
    std::size_t expire_idle();
    std::size_t session_count() const;

private:
    std::shared_ptr<SessionRecord> find(const std::string& id);
    ApiResponse create_session(const Json& body);
    ApiResponse get_session(SessionRecord& rec);
    ApiResponse open_door(SessionRecord& rec, const Json& body);
    ApiResponse final_choice(SessionRecord& rec, const Json& body);
    ApiResponse hint(SessionRecord& rec, const std::string& mode);

    ServiceConfig config_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<SessionRecord>> sessions_;
    std::uint64_t counter_ = 0;
    std::uint64_t salt_;
};

// Listens on `port` until the process is stopped. Returns 1 if binding fails.
int serve(int port, const std::string& host = "0.0.0.0", ServiceConfig config = {});

} // namespace qmonty
