#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vsa/corpus/label_sets.hpp"
#include "vsa/crowd/response.hpp"

namespace vsa::crowd {

inline constexpr std::size_t kDefaultMinAnnotators = 5;

/// Rating-scale bucket: 1-4 -> negative/relax, 5 -> neutral/normal,
/// 6-10 -> positive/stimulated. Returns the canonical index within the
/// SET1 or SET2 tag list. Throws Error(out_of_range) for votes outside [1,10]
/// and Error(invalid_argument) for a non-scale set.
std::size_t map_scale_to_class(int vote, corpus::LabelSetId scheme);

/// Plurality over bucketed votes. Ties go to the neutral-equivalent class
/// when it is among the leaders, otherwise to canonical order.
std::size_t aggregate_scale(std::span<const int> votes, corpus::LabelSetId scheme);

/// Per-tag strict majority (count >= floor(k/2) + 1 of k annotators). When no
/// tag reaches it, the single most-voted tag is returned (ties by canonical
/// order). Result is sorted canonical indices, never empty.
///
/// Throws Error(invalid_argument) when fewer than `min_responses` responses
/// are supplied or the set is not SET3/SET4.
std::vector<std::size_t> aggregate_tagset(std::span<const CrowdResponse> responses,
                                          corpus::LabelSetId set,
                                          std::size_t min_responses = kDefaultMinAnnotators);

/// Same rule over pre-counted votes; the building block of aggregate_tagset.
/// Returns true in `fallback` when no tag had a majority.
std::vector<std::size_t> majority_tags(std::span<const std::size_t> vote_counts, std::size_t annotators,
                                       bool* fallback = nullptr);

struct AggregatedAnnotation {
    std::string image_id;
    std::size_t set1_label = 0;
    std::size_t set2_label = 0;
    std::vector<std::size_t> set3_labels;
    std::vector<std::size_t> set4_labels;
    std::array<std::size_t, 5> q5_histogram{};
    std::size_t annotator_count = 0;

    bool finalized(std::size_t min_annotators = kDefaultMinAnnotators) const {
        return annotator_count >= min_annotators;
    }
    const std::vector<std::size_t>& tagset(corpus::LabelSetId set) const {
        return set == corpus::LabelSetId::set3 ? set3_labels : set4_labels;
    }

    friend bool operator==(const AggregatedAnnotation&, const AggregatedAnnotation&) = default;
};

/// Consensus for a single image; all responses must share one image_id.
AggregatedAnnotation aggregate_image(std::span<const CrowdResponse> responses,
                                     std::size_t min_responses = kDefaultMinAnnotators);

struct AggregationResult {
    std::vector<AggregatedAnnotation> annotations;  // sorted by image_id
    std::vector<std::string> unfinalized;           // images below the minimum
};

/// Groups by image and aggregates each; parallel over images. Output does
/// not depend on the order of `responses`.
AggregationResult aggregate_all(std::span<const CrowdResponse> responses,
                                std::size_t min_responses = kDefaultMinAnnotators);

}  // namespace vsa::crowd
