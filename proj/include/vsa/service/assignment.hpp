#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vsa/core/rng.hpp"
#include "vsa/crowd/response.hpp"

namespace vsa::service {

using Clock = std::function<std::chrono::system_clock::time_point()>;

struct AssignmentConfig {
    std::size_t target_responses = 5;
    std::chrono::seconds expiry{30 * 60};
    std::string form_version = "1";
};

struct Assignment {
    std::string image_id;
    std::string token;
    std::chrono::system_clock::time_point issued_at;
};

enum class SubmitStatus { accepted, unknown_assignment, expired, duplicate, invalid };

struct SubmitOutcome {
    SubmitStatus status = SubmitStatus::invalid;
    std::optional<crowd::CrowdResponse> response;
    std::vector<crowd::FieldError> errors;
    std::string message;
};

struct ImageProgress {
    std::size_t completed = 0;
    std::size_t in_flight = 0;
};

/// Assignment bookkeeping for the annotation study. All operations take one
/// lock, so each check-then-update runs atomically.
class AssignmentState {
public:
    /// `image_ids` in manifest order, which breaks preference ties.
    AssignmentState(std::vector<std::string> image_ids, AssignmentConfig config, Clock clock = {},
                    std::optional<std::uint64_t> token_seed = std::nullopt);

    /// Counts stored responses towards completion (service restart). Responses
    /// for unknown images are ignored and reported in the return value.
    std::vector<std::string> restore(std::span<const crowd::CrowdResponse> stored);

    /// Next image for the worker, or std::nullopt when none is eligible. A
    /// worker holding an unexpired assignment gets the same one back. Among
    /// images below target that the worker neither answered nor holds, the
    /// one with the fewest completed, then fewest in-flight responses, then
    /// the earliest in manifest order is chosen. Throws
    /// Error(invalid_argument) for an empty worker id.
    std::optional<Assignment> next_assignment(const std::string& worker_id);

    /// Completes the assignment behind `token` with the given answers. Worker
    /// and image come from the assignment; the response id, elapsed time
    /// (submit minus issue time) and submission timestamp are set here.
    /// `persist` runs under the lock before the counters move, so the stored
    /// log and the counts never disagree.
    SubmitOutcome submit(const std::string& token, crowd::RawResponse raw,
                         const std::function<void(const crowd::CrowdResponse&)>& persist);

    ImageProgress progress(const std::string& image_id) const;
    std::size_t image_count() const noexcept { return image_ids_.size(); }
    std::size_t completed_images() const;
    std::size_t total_completed() const;
    const AssignmentConfig& config() const noexcept { return config_; }

private:
    enum class TicketState { in_flight, completed, expired };
    struct Ticket {
        std::string worker_id;
        std::size_t image = 0;
        std::chrono::system_clock::time_point issued_at;
        TicketState state = TicketState::in_flight;
    };
    struct ImageState {
        std::size_t completed = 0;
        std::map<std::string, std::string> in_flight;  // worker -> token
    };

    void expire_stale(std::chrono::system_clock::time_point now);
    std::string new_token();
    std::chrono::system_clock::time_point now() const;

    std::vector<std::string> image_ids_;
    std::unordered_map<std::string, std::size_t> image_index_;
    AssignmentConfig config_;
    Clock clock_;
    mutable std::mutex mutex_;
    Rng token_rng_;
    std::vector<ImageState> images_;
    std::unordered_map<std::string, std::set<std::size_t>> answered_;  // worker -> images
    std::unordered_map<std::string, std::string> held_;                // worker -> token
    std::unordered_map<std::string, Ticket> tickets_;
    std::size_t next_response_ = 1;
};

/// "YYYY-MM-DDTHH:MM:SSZ" in UTC.
std::string format_utc(std::chrono::system_clock::time_point t);

}  // namespace vsa::service
