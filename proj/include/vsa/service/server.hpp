#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "vsa/corpus/manifest.hpp"
#include "vsa/service/assignment.hpp"
#include "vsa/service/response_store.hpp"

namespace vsa::service {

inline constexpr const char* kAdminTokenEnv = "VSA_ADMIN_TOKEN";
inline constexpr const char* kAdminTokenHeader = "X-Admin-Token";

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path store_path = "responses.csv";
    /// Empty disables /api/export.
    std::string admin_token;
    /// Static annotation UI served at "/", if set.
    std::optional<std::filesystem::path> ui_dir;
    AssignmentConfig assignment;
    /// Client/server elapsed-time differences above this are logged.
    double elapsed_tolerance_seconds = 2.0;
    /// Request threads. Keep-alive connections hold a thread while idle, so
    /// this bounds the number of concurrently connected clients.
    std::size_t worker_threads = 64;
};

/// Annotation HTTP service:
///
///   GET  /api/assignment?worker=<id>  -> {image_id, image_url, form_version, assignment_token} | {done: true}
///   POST /api/response                -> 200 | 400 | 404 | 409 | 410 | 422
///   GET  /api/export                  -> responses CSV (X-Admin-Token header)
///   GET  /api/health                  -> status JSON
///   GET  /images/<relative_path>      -> corpus images
class AnnotationServer {
public:
    AnnotationServer(corpus::Manifest manifest, ServerConfig config, Clock clock = {});
    ~AnnotationServer();

    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    /// Binds the configured host and port (0 picks a free port) and returns
    /// the bound port. Throws Error(unsupported) when binding fails.
    int bind();
    /// Serves until stop(); call bind() first.
    void serve();
    /// Blocks until serve() is accepting connections.
    void wait_until_ready() const;
    void stop();
    bool running() const;

    AssignmentState& state();
    ResponseStore& store();
    /// Warnings from replaying the response log.
    const std::vector<std::string>& startup_warnings() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace vsa::service
