#include "vsa/service/server.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>

#include <httplib.h>
#include <json.hpp>

#include "vsa/core/csv.hpp"
#include "vsa/core/error.hpp"

namespace vsa::service {
namespace {

using nlohmann::json;

std::string encode_path(const std::string& path) {
    std::string out;
    for (unsigned char c : path) {
        if (std::isalnum(c) || c == '/' || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            char buffer[4];
            std::snprintf(buffer, sizeof buffer, "%%%02X", c);
            out += buffer;
        }
    }
    return out;
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

std::string scalar_text(const json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<long long>());
    if (value.is_number()) return csv::format_double(value.get<double>());
    if (value.is_null()) return "";
    return value.dump();
}

std::vector<std::string> list_field(const json& value) {
    if (value.is_null()) return {};
    if (value.is_string()) return csv::split_multi(value.get<std::string>());
    std::vector<std::string> out;
    if (value.is_array()) {
        for (const auto& item : value) out.push_back(scalar_text(item));
    }
    return out;
}

crowd::RawResponse raw_from_json(const json& body, std::vector<crowd::FieldError>& errors) {
    crowd::RawResponse raw;
    const auto text = [&](const char* key) { return body.contains(key) ? scalar_text(body[key]) : std::string(); };
    const auto list = [&](const char* key) {
        if (body.contains(key) && !body[key].is_null() && !body[key].is_array() && !body[key].is_string()) {
            errors.push_back({key, "must be a list of strings"});
            return std::vector<std::string>{};
        }
        return body.contains(key) ? list_field(body[key]) : std::vector<std::string>{};
    };
    raw.worker_id = text("worker_id");
    raw.image_id = text("image_id");
    raw.q1 = text("q1");
    raw.q2 = text("q2");
    raw.q3_tags = list("q3_tags");
    raw.q3_other = text("q3_other");
    raw.q4_tags = list("q4_tags");
    raw.q4_other = text("q4_other");
    raw.q5_features = list("q5_features");
    return raw;
}

json errors_json(const std::vector<crowd::FieldError>& errors) {
    json out = json::array();
    for (const auto& e : errors) out.push_back({{"field", e.field}, {"message", e.message}});
    return out;
}

}  // namespace

struct AnnotationServer::Impl {
    corpus::Manifest manifest;
    ServerConfig config;
    ResponseStore store;
    AssignmentState state;
    std::vector<std::string> warnings;
    httplib::Server http;
    bool bound = false;

    Impl(corpus::Manifest m, ServerConfig c, Clock clock)
        : manifest(std::move(m)),
          config(std::move(c)),
          store(config.store_path),
          state(image_ids(manifest), config.assignment, std::move(clock)) {
        const auto threads = std::max<std::size_t>(1, config.worker_threads);
        http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
        warnings = store.warnings();
        const auto stored = store.snapshot();
        for (auto& w : state.restore(stored)) warnings.push_back(std::move(w));
        routes();
    }

    static std::vector<std::string> image_ids(const corpus::Manifest& manifest) {
        std::vector<std::string> ids;
        for (const auto& r : manifest.records()) ids.push_back(r.image_id);
        return ids;
    }

    void routes() {
        http.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200,
                      {{"status", "ok"},
                       {"images", state.image_count()},
                       {"images_complete", state.completed_images()},
                       {"responses", store.size()},
                       {"target_responses", config.assignment.target_responses},
                       {"form_version", config.assignment.form_version}});
        });

        http.Get("/api/assignment", [this](const httplib::Request& req, httplib::Response& res) {
            const auto worker = req.get_param_value("worker");
            if (worker.empty()) {
                send_json(res, 400, {{"error", "missing worker parameter"}});
                return;
            }
            const auto assignment = state.next_assignment(worker);
            if (!assignment) {
                send_json(res, 200, {{"done", true}});
                return;
            }
            const auto& record = manifest.records()[*manifest.find(assignment->image_id)];
            send_json(res, 200,
                      {{"image_id", assignment->image_id},
                       {"image_url", "/images/" + encode_path(record.relative_path)},
                       {"form_version", config.assignment.form_version},
                       {"assignment_token", assignment->token},
                       {"issued_at", format_utc(assignment->issued_at)}});
        });

        http.Post("/api/response", [this](const httplib::Request& req, httplib::Response& res) {
            json body;
            try {
                body = json::parse(req.body);
            } catch (const json::exception&) {
                send_json(res, 400, {{"error", "request body is not valid JSON"}});
                return;
            }
            if (!body.is_object()) {
                send_json(res, 400, {{"error", "request body must be a JSON object"}});
                return;
            }
            const auto token = body.contains("assignment_token") ? scalar_text(body["assignment_token"]) : "";
            if (token.empty()) {
                send_json(res, 400, {{"error", "missing assignment_token"}});
                return;
            }
            std::vector<crowd::FieldError> shape_errors;
            auto raw = raw_from_json(body, shape_errors);
            if (!shape_errors.empty()) {
                send_json(res, 422, {{"error", "validation failed"}, {"errors", errors_json(shape_errors)}});
                return;
            }
            const auto outcome = state.submit(token, std::move(raw),
                                              [this](const crowd::CrowdResponse& r) { store.append(r); });
            switch (outcome.status) {
                case SubmitStatus::accepted: {
                    const auto& r = *outcome.response;
                    json ack{{"status", "accepted"}, {"response_id", r.response_id}, {"elapsed_seconds", r.elapsed_seconds}};
                    if (body.contains("client_elapsed_seconds") && body["client_elapsed_seconds"].is_number()) {
                        const double client = body["client_elapsed_seconds"].get<double>();
                        const double gap = std::abs(client - r.elapsed_seconds);
                        ack["client_elapsed_seconds"] = client;
                        ack["elapsed_discrepancy"] = gap;
                        if (gap > config.elapsed_tolerance_seconds) {
                            std::cerr << "warning: response " << r.response_id << " client elapsed " << client
                                      << " s differs from server elapsed " << r.elapsed_seconds << " s\n";
                        }
                    }
                    send_json(res, 200, ack);
                    break;
                }
                case SubmitStatus::unknown_assignment:
                    send_json(res, 404, {{"error", outcome.message}});
                    break;
                case SubmitStatus::expired:
                    send_json(res, 410, {{"error", outcome.message}});
                    break;
                case SubmitStatus::duplicate:
                    send_json(res, 409, {{"error", outcome.message}});
                    break;
                case SubmitStatus::invalid:
                    send_json(res, 422, {{"error", outcome.message}, {"errors", errors_json(outcome.errors)}});
                    break;
            }
        });

        http.Get("/api/export", [this](const httplib::Request& req, httplib::Response& res) {
            if (config.admin_token.empty() || req.get_header_value(kAdminTokenHeader) != config.admin_token) {
                send_json(res, 401, {{"error", "unauthorized"}});
                return;
            }
            res.status = 200;
            res.set_header("Content-Disposition", "attachment; filename=\"responses.csv\"");
            res.set_content(store.export_csv(), "text/csv");
        });

        http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string message = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const Error& e) {
                message = e.what();
            } catch (const std::exception& e) {
                message = e.what();
            } catch (...) {
            }
            send_json(res, 500, {{"error", message}});
        });

        if (!manifest.base_dir().empty() && std::filesystem::is_directory(manifest.base_dir())) {
            http.set_mount_point("/images", manifest.base_dir().string());
        }
        if (config.ui_dir) {
            if (!http.set_mount_point("/", config.ui_dir->string())) {
                throw Error(ErrorKind::not_found, "UI directory not found: '" + config.ui_dir->string() + "'");
            }
        }
    }
};

AnnotationServer::AnnotationServer(corpus::Manifest manifest, ServerConfig config, Clock clock)
    : impl_(std::make_unique<Impl>(std::move(manifest), std::move(config), std::move(clock))) {}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind() {
    auto& c = impl_->config;
    int port = c.port;
    if (port == 0) {
        port = impl_->http.bind_to_any_port(c.host);
        if (port < 0) throw Error(ErrorKind::unsupported, "cannot bind " + c.host);
    } else if (!impl_->http.bind_to_port(c.host, port)) {
        throw Error(ErrorKind::unsupported, "cannot bind " + c.host + ":" + std::to_string(port));
    }
    impl_->bound = true;
    return port;
}

void AnnotationServer::serve() {
    if (!impl_->bound) bind();
    impl_->http.listen_after_bind();
}

void AnnotationServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

void AnnotationServer::stop() {
    if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

bool AnnotationServer::running() const { return impl_->http.is_running(); }

AssignmentState& AnnotationServer::state() { return impl_->state; }
ResponseStore& AnnotationServer::store() { return impl_->store; }
const std::vector<std::string>& AnnotationServer::startup_warnings() const { return impl_->warnings; }

}  // namespace vsa::service
