#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vsa::crowd {

/// Image aspects a worker can name as most influential (question 5).
enum class InfluenceFeature { scene_background, human_expressions, object_level, color_contrast, other };

inline constexpr std::array<std::string_view, 5> kInfluenceNames{
    "scene_background", "human_expressions", "object_level", "color_contrast", "other"};

std::optional<InfluenceFeature> parse_influence(std::string_view text);
std::string_view to_string(InfluenceFeature f);

/// One worker's answers for one image. Tag fields hold canonical indices
/// into SET3 / SET4, kept sorted and unique.
struct CrowdResponse {
    std::string response_id;
    std::string worker_id;
    std::string image_id;
    double elapsed_seconds = 0.0;
    int q1 = 0;
    int q2 = 0;
    std::vector<std::size_t> q3_tags;
    std::string q3_other;
    std::vector<std::size_t> q4_tags;
    std::string q4_other;
    std::vector<InfluenceFeature> q5_features;
    std::string submitted_at;  // UTC, ISO-8601 "YYYY-MM-DDTHH:MM:SSZ"

    friend bool operator==(const CrowdResponse&, const CrowdResponse&) = default;
};

struct FieldError {
    std::string field;
    std::string message;
};

/// Field-level checks shared by CSV ingest and the annotation service.
/// Uniqueness across a store is checked by the caller.
std::vector<FieldError> validate(const CrowdResponse& response);

/// Raw text fields of one response as they appear in a CSV row or a JSON
/// payload, before conversion.
struct RawResponse {
    std::string response_id;
    std::string worker_id;
    std::string image_id;
    std::string elapsed_seconds;
    std::string q1;
    std::string q2;
    std::vector<std::string> q3_tags;
    std::string q3_other;
    std::vector<std::string> q4_tags;
    std::string q4_other;
    std::vector<std::string> q5_features;
    std::string submitted_at;
};

/// Converts and validates; on failure returns std::nullopt and fills `errors`.
std::optional<CrowdResponse> parse_response(const RawResponse& raw, std::vector<FieldError>& errors);

inline const std::vector<std::string> kResponseHeader{
    "response_id", "worker_id", "image_id",  "elapsed_seconds", "q1",          "q2",
    "q3_tags",     "q3_other",  "q4_tags",   "q4_other",        "q5_features", "submitted_at"};

struct RowDiagnostic {
    std::size_t line = 0;
    std::string message;
};

struct IngestResult {
    std::vector<CrowdResponse> responses;
    std::vector<RowDiagnostic> rejected;
};

/// Reads `responses.csv`. Invalid rows (bad numbers, out-of-range ratings,
/// unknown tags, duplicate (worker, image)) are rejected with a diagnostic;
/// the first occurrence of a duplicated pair is kept.
///
/// Throws Error(not_found) for a missing file and Error(parse) for a bad header.
IngestResult ingest_responses(const std::filesystem::path& path);

std::string response_row(const CrowdResponse& response);
void write_responses(std::ostream& out, std::span<const CrowdResponse> responses);
void write_responses(const std::filesystem::path& path, std::span<const CrowdResponse> responses);

struct FilterResult {
    std::vector<CrowdResponse> kept;
    std::size_t removed = 0;
};

/// Drops responses answered faster than `min_elapsed` seconds.
FilterResult filter_responses(std::span<const CrowdResponse> responses, double min_elapsed);

inline constexpr double kDefaultMinElapsedSeconds = 10.0;

}  // namespace vsa::crowd
