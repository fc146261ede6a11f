#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vsa/corpus/label_sets.hpp"
#include "vsa/crowd/aggregate.hpp"

namespace vsa::crowd {

struct TagCombination {
    std::vector<std::size_t> tags;  // ascending canonical indices
    std::size_t count = 0;

    friend bool operator==(const TagCombination&, const TagCombination&) = default;
};

/// Counts every unordered combination of `arity` tags that occur together in
/// one tag set. Sorted by count descending, then lexicographically by
/// canonical indices. Combinations with zero count are omitted.
/// Throws Error(invalid_argument) unless arity is 2 or 3.
std::vector<TagCombination> cooccurrence(std::span<const std::vector<std::size_t>> tag_sets,
                                         std::size_t arity);

/// Same, over the SET3 or SET4 consensus labels of aggregated annotations.
std::vector<TagCombination> cooccurrence(std::span<const AggregatedAnnotation> annotations,
                                         corpus::LabelSetId set, std::size_t arity);

enum class Question { q1, q2, q5 };

struct HistogramBucket {
    std::string name;  // "1".."10" for ratings, feature name for q5
    std::size_t count = 0;
    double percent = 0.0;
};

/// Per-bucket counts and percentages. Q1/Q2 have buckets 1..10 (one vote per
/// response); Q5 has the five influence categories, each pick counted once,
/// percentages relative to all picks. Throws Error(invalid_argument) on empty
/// input.
std::vector<HistogramBucket> question_distribution(std::span<const CrowdResponse> responses, Question q);

/// Writes `stats_report.json`: rating and Q5 distributions, the bucketed
/// sentiment distribution, and pair/triple co-occurrence rankings for SET3
/// and SET4.
void write_stats_report(const std::filesystem::path& path, std::span<const CrowdResponse> responses,
                        std::span<const AggregatedAnnotation> annotations, std::size_t top_k = 20);

}  // namespace vsa::crowd
