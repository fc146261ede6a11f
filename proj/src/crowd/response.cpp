#include "vsa/crowd/response.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <utility>

#include "vsa/core/csv.hpp"
#include "vsa/core/error.hpp"
#include "vsa/corpus/label_sets.hpp"

namespace vsa::crowd {

using corpus::LabelSetId;

std::optional<InfluenceFeature> parse_influence(std::string_view text) {
    const auto trimmed = csv::trim(text);
    for (std::size_t i = 0; i < kInfluenceNames.size(); ++i) {
        if (kInfluenceNames[i] == trimmed) return static_cast<InfluenceFeature>(i);
    }
    return std::nullopt;
}

std::string_view to_string(InfluenceFeature f) { return kInfluenceNames[static_cast<std::size_t>(f)]; }

namespace {

bool valid_timestamp(const std::string& text) {
    static const std::regex pattern(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?Z)");
    return std::regex_match(text, pattern);
}

bool has_newline(const std::string& text) { return text.find_first_of("\r\n") != std::string::npos; }

template <typename T>
bool is_sorted_unique(const std::vector<T>& v) {
    return std::adjacent_find(v.begin(), v.end(), [](const T& a, const T& b) { return !(a < b); }) ==
           v.end();
}

std::vector<std::size_t> parse_tags(const std::vector<std::string>& names, LabelSetId set,
                                    const char* field, std::vector<FieldError>& errors) {
    std::set<std::size_t> out;
    for (const auto& n : names) {
        if (n.empty()) continue;
        if (auto idx = corpus::tag_index(set, n)) {
            out.insert(*idx);
        } else {
            errors.push_back({field, "unknown tag '" + n + "' for " + std::string(corpus::name(set))});
        }
    }
    return {out.begin(), out.end()};
}

std::string tag_field(const std::vector<std::size_t>& tags, LabelSetId set) {
    std::vector<std::string> names;
    for (auto t : tags) names.emplace_back(corpus::tags(set)[t]);
    return csv::join_multi(names);
}

}  // namespace

std::vector<FieldError> validate(const CrowdResponse& r) {
    std::vector<FieldError> errors;
    if (r.response_id.empty()) errors.push_back({"response_id", "must be non-empty"});
    if (r.worker_id.empty()) errors.push_back({"worker_id", "must be non-empty"});
    if (r.image_id.empty()) errors.push_back({"image_id", "must be non-empty"});
    if (!std::isfinite(r.elapsed_seconds) || r.elapsed_seconds < 0) {
        errors.push_back({"elapsed_seconds", "must be a non-negative number"});
    }
    if (r.q1 < 1 || r.q1 > 10) errors.push_back({"q1", "q1 out of range [1,10]"});
    if (r.q2 < 1 || r.q2 > 10) errors.push_back({"q2", "q2 out of range [1,10]"});

    const auto check_tags = [&](const std::vector<std::size_t>& tags, const std::string& other,
                                LabelSetId set, const char* field) {
        const auto limit = corpus::tags(set).size();
        if (std::any_of(tags.begin(), tags.end(), [&](auto t) { return t >= limit; })) {
            errors.push_back({field, "tag index outside " + std::string(corpus::name(set))});
        }
        if (!is_sorted_unique(tags)) errors.push_back({field, "tags must be unique"});
        if (tags.empty() && csv::trim(other).empty()) {
            errors.push_back({field, std::string(field) + " requires at least one tag or free text"});
        }
    };
    check_tags(r.q3_tags, r.q3_other, LabelSetId::set3, "q3_tags");
    check_tags(r.q4_tags, r.q4_other, LabelSetId::set4, "q4_tags");
    if (has_newline(r.q3_other)) errors.push_back({"q3_other", "must not contain line breaks"});
    if (has_newline(r.q4_other)) errors.push_back({"q4_other", "must not contain line breaks"});
    if (!is_sorted_unique(r.q5_features)) errors.push_back({"q5_features", "features must be unique"});
    if (!valid_timestamp(r.submitted_at)) {
        errors.push_back({"submitted_at", "expected UTC timestamp YYYY-MM-DDTHH:MM:SSZ"});
    }
    return errors;
}

std::optional<CrowdResponse> parse_response(const RawResponse& raw, std::vector<FieldError>& errors) {
    CrowdResponse r;
    const auto before = errors.size();
    r.response_id = csv::trim(raw.response_id);
    r.worker_id = csv::trim(raw.worker_id);
    r.image_id = csv::trim(raw.image_id);
    r.submitted_at = csv::trim(raw.submitted_at);
    r.q3_other = raw.q3_other;
    r.q4_other = raw.q4_other;

    if (!csv::parse_double(csv::trim(raw.elapsed_seconds), r.elapsed_seconds)) {
        errors.push_back({"elapsed_seconds", "malformed number '" + raw.elapsed_seconds + "'"});
    }
    const auto parse_rating = [&](const std::string& text, int& dst, const char* field) {
        long long v = 0;
        if (!csv::parse_int(csv::trim(text), v)) {
            errors.push_back({field, "malformed integer '" + text + "'"});
            return false;
        }
        // Clamp into int range so the range check reports it.
        dst = static_cast<int>(std::clamp<long long>(v, -1, 11));
        return true;
    };
    parse_rating(raw.q1, r.q1, "q1");
    parse_rating(raw.q2, r.q2, "q2");
    r.q3_tags = parse_tags(raw.q3_tags, LabelSetId::set3, "q3_tags", errors);
    r.q4_tags = parse_tags(raw.q4_tags, LabelSetId::set4, "q4_tags", errors);

    std::set<InfluenceFeature> features;
    for (const auto& f : raw.q5_features) {
        if (f.empty()) continue;
        if (auto parsed = parse_influence(f)) {
            features.insert(*parsed);
        } else {
            errors.push_back({"q5_features", "unknown influence feature '" + f + "'"});
        }
    }
    r.q5_features.assign(features.begin(), features.end());

    // Semantic checks still run so a form gets every problem at once; fields
    // that failed conversion keep only their conversion error.
    std::set<std::string> failed;
    for (auto i = before; i < errors.size(); ++i) failed.insert(errors[i].field);
    for (auto& e : validate(r)) {
        if (!failed.count(e.field)) errors.push_back(std::move(e));
    }
    if (errors.size() != before) return std::nullopt;
    return r;
}

IngestResult ingest_responses(const std::filesystem::path& path) {
    const auto table = csv::read_file(path);
    csv::require_header(table, kResponseHeader, path);

    IngestResult result;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& row : table.rows) {
        if (row.fields.size() != kResponseHeader.size()) {
            result.rejected.push_back({row.line, "expected " + std::to_string(kResponseHeader.size()) +
                                                     " fields, got " +
                                                     std::to_string(row.fields.size())});
            continue;
        }
        const auto& f = row.fields;
        RawResponse raw{f[0], f[1], f[2], f[3], f[4], f[5],
                        csv::split_multi(f[6]), f[7], csv::split_multi(f[8]), f[9],
                        csv::split_multi(f[10]), f[11]};
        std::vector<FieldError> errors;
        auto parsed = parse_response(raw, errors);
        if (!parsed) {
            std::string message;
            for (const auto& e : errors) {
                if (!message.empty()) message += "; ";
                message += e.message;
            }
            result.rejected.push_back({row.line, message});
            continue;
        }
        if (!seen.emplace(parsed->worker_id, parsed->image_id).second) {
            result.rejected.push_back({row.line, "duplicate response for worker '" + parsed->worker_id +
                                                     "' and image '" + parsed->image_id + "'"});
            continue;
        }
        result.responses.push_back(std::move(*parsed));
    }
    return result;
}

std::string response_row(const CrowdResponse& r) {
    std::vector<std::string> features;
    for (auto f : r.q5_features) features.emplace_back(to_string(f));
    return csv::join_row({r.response_id, r.worker_id, r.image_id, csv::format_double(r.elapsed_seconds),
                          std::to_string(r.q1), std::to_string(r.q2), tag_field(r.q3_tags, LabelSetId::set3),
                          r.q3_other, tag_field(r.q4_tags, LabelSetId::set4), r.q4_other,
                          csv::join_multi(features), r.submitted_at});
}

void write_responses(std::ostream& out, std::span<const CrowdResponse> responses) {
    out << csv::join_row(kResponseHeader) << '\n';
    for (const auto& r : responses) out << response_row(r) << '\n';
}

void write_responses(const std::filesystem::path& path, std::span<const CrowdResponse> responses) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::not_found, "cannot write '" + path.string() + "'");
    write_responses(out, responses);
}

FilterResult filter_responses(std::span<const CrowdResponse> responses, double min_elapsed) {
    if (min_elapsed < 0) throw Error(ErrorKind::invalid_argument, "min_elapsed must be >= 0");
    FilterResult out;
    for (const auto& r : responses) {
        if (r.elapsed_seconds < min_elapsed) {
            ++out.removed;
        } else {
            out.kept.push_back(r);
        }
    }
    return out;
}

}  // namespace vsa::crowd
