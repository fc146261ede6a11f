#include "vsa/service/response_store.hpp"

#include <sstream>

#include "vsa/core/csv.hpp"
#include "vsa/core/error.hpp"

namespace vsa::service {

ResponseStore::ResponseStore(std::filesystem::path path) : path_(std::move(path)) {
    const bool has_rows = std::filesystem::exists(path_) && std::filesystem::file_size(path_) > 0;
    if (has_rows) {
        auto ingested = crowd::ingest_responses(path_);
        responses_ = std::move(ingested.responses);
        for (const auto& r : ingested.rejected) {
            warnings_.push_back(path_.string() + ":" + std::to_string(r.line) + ": skipped: " + r.message);
        }
    } else if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    out_.open(path_, std::ios::app);
    if (!out_) throw Error(ErrorKind::not_found, "cannot open response log '" + path_.string() + "'");
    if (!has_rows) out_ << csv::join_row(crowd::kResponseHeader) << '\n' << std::flush;
}

void ResponseStore::append(const crowd::CrowdResponse& response) {
    std::lock_guard lock(mutex_);
    out_ << crowd::response_row(response) << '\n' << std::flush;
    if (!out_) throw Error(ErrorKind::corrupt, "failed to append to '" + path_.string() + "'");
    responses_.push_back(response);
}

std::vector<crowd::CrowdResponse> ResponseStore::snapshot() const {
    std::lock_guard lock(mutex_);
    return responses_;
}

std::size_t ResponseStore::size() const {
    std::lock_guard lock(mutex_);
    return responses_.size();
}

std::string ResponseStore::export_csv() const {
    const auto rows = snapshot();
    std::ostringstream out;
    crowd::write_responses(out, rows);
    return out.str();
}

}  // namespace vsa::service
