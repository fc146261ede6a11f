#include "vsa/service/assignment.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <random>

#include "vsa/core/error.hpp"

namespace vsa::service {
namespace {

std::uint64_t random_seed() {
    std::random_device device;
    return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

}  // namespace

std::string format_utc(std::chrono::system_clock::time_point t) {
    const std::time_t seconds = std::chrono::system_clock::to_time_t(t);
    std::tm utc{};
    gmtime_r(&seconds, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

AssignmentState::AssignmentState(std::vector<std::string> image_ids, AssignmentConfig config, Clock clock,
                                 std::optional<std::uint64_t> token_seed)
    : image_ids_(std::move(image_ids)),
      config_(std::move(config)),
      clock_(std::move(clock)),
      token_rng_(token_seed ? *token_seed : random_seed()),
      images_(image_ids_.size()) {
    if (config_.target_responses == 0) throw Error(ErrorKind::invalid_argument, "target_responses must be positive");
    for (std::size_t i = 0; i < image_ids_.size(); ++i) {
        if (!image_index_.emplace(image_ids_[i], i).second) {
            throw Error(ErrorKind::duplicate, "duplicate image_id '" + image_ids_[i] + "'");
        }
    }
}

std::chrono::system_clock::time_point AssignmentState::now() const {
    return clock_ ? clock_() : std::chrono::system_clock::now();
}

std::string AssignmentState::new_token() {
    char buffer[33];
    std::snprintf(buffer, sizeof buffer, "%016llx%016llx", static_cast<unsigned long long>(token_rng_.next()),
                  static_cast<unsigned long long>(token_rng_.next()));
    return buffer;
}

std::vector<std::string> AssignmentState::restore(std::span<const crowd::CrowdResponse> stored) {
    std::lock_guard lock(mutex_);
    std::vector<std::string> ignored;
    for (const auto& r : stored) {
        const auto it = image_index_.find(r.image_id);
        if (it == image_index_.end()) {
            ignored.push_back("response '" + r.response_id + "' refers to unknown image '" + r.image_id + "'");
            continue;
        }
        if (!answered_[r.worker_id].insert(it->second).second) {
            ignored.push_back("response '" + r.response_id + "' repeats worker '" + r.worker_id + "' on '" +
                              r.image_id + "'");
            continue;
        }
        ++images_[it->second].completed;
    }
    next_response_ += stored.size();
    return ignored;
}

void AssignmentState::expire_stale(std::chrono::system_clock::time_point at) {
    for (auto it = held_.begin(); it != held_.end();) {
        auto& ticket = tickets_.at(it->second);
        if (at - ticket.issued_at >= config_.expiry) {
            ticket.state = TicketState::expired;
            images_[ticket.image].in_flight.erase(ticket.worker_id);
            it = held_.erase(it);
        } else {
            ++it;
        }
    }
}

std::optional<Assignment> AssignmentState::next_assignment(const std::string& worker_id) {
    if (worker_id.empty()) throw Error(ErrorKind::invalid_argument, "worker id must be non-empty");
    std::lock_guard lock(mutex_);
    const auto at = now();
    expire_stale(at);

    if (const auto held = held_.find(worker_id); held != held_.end()) {
        const auto& ticket = tickets_.at(held->second);
        return Assignment{image_ids_[ticket.image], held->second, ticket.issued_at};
    }

    const auto answered = answered_.find(worker_id);
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < images_.size(); ++i) {
        const auto& image = images_[i];
        if (image.completed + image.in_flight.size() >= config_.target_responses) continue;
        if (answered != answered_.end() && answered->second.count(i)) continue;
        const auto key = std::make_pair(image.completed, image.in_flight.size());
        if (!best || key < std::make_pair(images_[*best].completed, images_[*best].in_flight.size())) best = i;
    }
    if (!best) return std::nullopt;

    auto token = new_token();
    while (tickets_.count(token)) token = new_token();
    tickets_.emplace(token, Ticket{worker_id, *best, at, TicketState::in_flight});
    images_[*best].in_flight.emplace(worker_id, token);
    held_.emplace(worker_id, token);
    return Assignment{image_ids_[*best], token, at};
}

SubmitOutcome AssignmentState::submit(const std::string& token, crowd::RawResponse raw,
                                      const std::function<void(const crowd::CrowdResponse&)>& persist) {
    std::lock_guard lock(mutex_);
    const auto at = now();
    SubmitOutcome outcome;
    const auto it = tickets_.find(token);
    if (it == tickets_.end()) {
        outcome.status = SubmitStatus::unknown_assignment;
        outcome.message = "no matching assignment";
        return outcome;
    }
    auto& ticket = it->second;
    if (ticket.state == TicketState::completed) {
        outcome.status = SubmitStatus::duplicate;
        outcome.message = "assignment already submitted";
        return outcome;
    }
    if (ticket.state == TicketState::expired || at - ticket.issued_at >= config_.expiry) {
        expire_stale(at);
        ticket.state = TicketState::expired;
        outcome.status = SubmitStatus::expired;
        outcome.message = "assignment expired";
        return outcome;
    }

    const auto& image_id = image_ids_[ticket.image];
    if (!raw.worker_id.empty() && raw.worker_id != ticket.worker_id) {
        outcome.errors.push_back({"worker_id", "does not match the assignment"});
    }
    if (!raw.image_id.empty() && raw.image_id != image_id) {
        outcome.errors.push_back({"image_id", "does not match the assignment"});
    }
    const double elapsed =
        std::round(std::chrono::duration<double>(at - ticket.issued_at).count() * 1000.0) / 1000.0;
    char id[32];
    std::snprintf(id, sizeof id, "resp-%06zu", next_response_);
    raw.response_id = id;
    raw.worker_id = ticket.worker_id;
    raw.image_id = image_id;
    raw.elapsed_seconds = std::to_string(elapsed);
    raw.submitted_at = format_utc(at);

    std::vector<crowd::FieldError> errors;
    auto response = crowd::parse_response(raw, errors);
    if (response) response->elapsed_seconds = elapsed;
    outcome.errors.insert(outcome.errors.end(), errors.begin(), errors.end());
    if (!response || !outcome.errors.empty()) {
        // The assignment stays open so the worker can correct and resubmit.
        outcome.status = SubmitStatus::invalid;
        outcome.message = "validation failed";
        return outcome;
    }

    if (persist) persist(*response);
    ++next_response_;
    ticket.state = TicketState::completed;
    auto& image = images_[ticket.image];
    image.in_flight.erase(ticket.worker_id);
    ++image.completed;
    answered_[ticket.worker_id].insert(ticket.image);
    held_.erase(ticket.worker_id);
    outcome.status = SubmitStatus::accepted;
    outcome.response = std::move(response);
    return outcome;
}

ImageProgress AssignmentState::progress(const std::string& image_id) const {
    std::lock_guard lock(mutex_);
    const auto it = image_index_.find(image_id);
    if (it == image_index_.end()) throw Error(ErrorKind::not_found, "unknown image '" + image_id + "'");
    const auto& image = images_[it->second];
    return {image.completed, image.in_flight.size()};
}

std::size_t AssignmentState::completed_images() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& image : images_) n += image.completed >= config_.target_responses;
    return n;
}

std::size_t AssignmentState::total_completed() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& image : images_) n += image.completed;
    return n;
}

}  // namespace vsa::service
