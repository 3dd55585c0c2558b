#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>

#include "json.hpp"

#include "alba/bundle.hpp"
#include "alba/error.hpp"
#include "alba/session.hpp"

namespace httplib {
class Server;
}

namespace alba {

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

/// HTTP status for a domain error code.
int http_status(Errc code);
ApiResponse error_response(const Error& e);

struct ServiceOptions {
    std::chrono::seconds session_ttl{1800};
    std::optional<std::filesystem::path> transcript_dir; // one <session_id>.jsonl per session
    std::function<std::chrono::steady_clock::time_point()> clock = [] { return std::chrono::steady_clock::now(); };
};

/// Live sessions over one read-only bundle. Requests for distinct sessions run
/// concurrently; requests for one session are serialized.
class AssessmentService {
public:
    AssessmentService(std::shared_ptr<const ModelBundle> bundle, ServiceOptions options = {});

    ApiResponse create_session(const nlohmann::json& body);
    ApiResponse submit_response(const std::string& session_id, const nlohmann::json& body);
    ApiResponse get_session(const std::string& session_id);
    ApiResponse items() const;
    ApiResponse health() const;

    /// Drops sessions idle for longer than the ttl; returns how many.
    std::size_t expire_idle();
    std::size_t session_count() const;

    /// Registers the /api routes.
    void mount(httplib::Server& server);

private:
    struct Entry {
        std::mutex mutex;
        std::unique_ptr<AssessmentSession> session;
        std::chrono::steady_clock::time_point created;
        std::chrono::steady_clock::time_point last_active;
        std::optional<std::filesystem::path> transcript;
    };

    std::shared_ptr<Entry> find(const std::string& id);
    std::string new_id();
    void append(const Entry& e, const nlohmann::json& line) const;

    std::shared_ptr<const ModelBundle> bundle_;
    ServiceOptions options_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::mt19937_64 rng_;
};

/// Blocks serving on host:port until the server is stopped.
void serve(AssessmentService& service, const std::string& host, int port);

} // namespace alba
