#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "vsa/crowd/response.hpp"

namespace vsa::service {

/// Append-only response log in the `responses.csv` format. Existing rows are
/// replayed on open; rows that fail ingestion are skipped with a warning.
class ResponseStore {
public:
    explicit ResponseStore(std::filesystem::path path);

    /// Appends and flushes one row. Thread-safe.
    void append(const crowd::CrowdResponse& response);

    std::vector<crowd::CrowdResponse> snapshot() const;
    std::size_t size() const;

    /// Header plus one row per stored response, in storage order.
    std::string export_csv() const;

    const std::filesystem::path& path() const noexcept { return path_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::vector<crowd::CrowdResponse> responses_;
    std::vector<std::string> warnings_;
    std::ofstream out_;
};

}  // namespace vsa::service
