#include "vsa/crowd/aggregate.hpp"

#include <algorithm>
#include <exception>
#include <map>

#include "vsa/core/error.hpp"

namespace vsa::crowd {

using corpus::LabelSetId;

std::size_t map_scale_to_class(int vote, LabelSetId scheme) {
    if (!corpus::is_scale_set(scheme)) {
        throw Error(ErrorKind::invalid_argument, "rating scale applies to SET1 and SET2 only");
    }
    if (vote < 1 || vote > 10) {
        throw Error(ErrorKind::out_of_range, "vote " + std::to_string(vote) + " outside [1,10]");
    }
    // SET1 order: positive, negative, neutral.  SET2 order: relax, stimulated, normal.
    const bool set1 = scheme == LabelSetId::set1;
    if (vote <= 4) return set1 ? 1 : 0;
    if (vote == 5) return 2;
    return set1 ? 0 : 1;
}

std::size_t aggregate_scale(std::span<const int> votes, LabelSetId scheme) {
    if (votes.empty()) throw Error(ErrorKind::invalid_argument, "cannot aggregate an empty vote list");
    std::array<std::size_t, 3> counts{};
    for (int v : votes) ++counts[map_scale_to_class(v, scheme)];
    const auto best = *std::max_element(counts.begin(), counts.end());
    const auto neutral = corpus::neutral_index(scheme);
    if (counts[neutral] == best) return neutral;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == best) return c;
    }
    return neutral;
}

std::vector<std::size_t> majority_tags(std::span<const std::size_t> vote_counts, std::size_t annotators,
                                       bool* fallback) {
    const std::size_t needed = annotators / 2 + 1;
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < vote_counts.size(); ++t) {
        if (vote_counts[t] >= needed) out.push_back(t);
    }
    if (fallback) *fallback = out.empty();
    if (out.empty() && !vote_counts.empty()) {
        // max_element returns the first maximum, i.e. canonical order.
        out.push_back(static_cast<std::size_t>(
            std::max_element(vote_counts.begin(), vote_counts.end()) - vote_counts.begin()));
    }
    return out;
}

std::vector<std::size_t> aggregate_tagset(std::span<const CrowdResponse> responses, LabelSetId set,
                                          std::size_t min_responses) {
    if (corpus::is_scale_set(set)) {
        throw Error(ErrorKind::invalid_argument, "tag aggregation applies to SET3 and SET4 only");
    }
    if (responses.size() < min_responses || responses.empty()) {
        throw Error(ErrorKind::invalid_argument,
                    "need at least " + std::to_string(std::max<std::size_t>(min_responses, 1)) +
                        " responses, got " + std::to_string(responses.size()));
    }
    std::vector<std::size_t> counts(corpus::tags(set).size(), 0);
    for (const auto& r : responses) {
        for (auto t : set == LabelSetId::set3 ? r.q3_tags : r.q4_tags) ++counts.at(t);
    }
    return majority_tags(counts, responses.size());
}

AggregatedAnnotation aggregate_image(std::span<const CrowdResponse> responses, std::size_t min_responses) {
    if (responses.empty()) throw Error(ErrorKind::invalid_argument, "no responses for image");
    AggregatedAnnotation a;
    a.image_id = responses.front().image_id;
    std::vector<int> q1;
    std::vector<int> q2;
    for (const auto& r : responses) {
        if (r.image_id != a.image_id) {
            throw Error(ErrorKind::invalid_argument, "responses span several images");
        }
        q1.push_back(r.q1);
        q2.push_back(r.q2);
        for (auto f : r.q5_features) ++a.q5_histogram[static_cast<std::size_t>(f)];
    }
    a.set1_label = aggregate_scale(q1, LabelSetId::set1);
    a.set2_label = aggregate_scale(q2, LabelSetId::set2);
    a.set3_labels = aggregate_tagset(responses, LabelSetId::set3, min_responses);
    a.set4_labels = aggregate_tagset(responses, LabelSetId::set4, min_responses);
    a.annotator_count = responses.size();
    return a;
}

AggregationResult aggregate_all(std::span<const CrowdResponse> responses, std::size_t min_responses) {
    std::map<std::string, std::vector<CrowdResponse>> by_image;
    for (const auto& r : responses) by_image[r.image_id].push_back(r);

    std::vector<std::vector<CrowdResponse>*> groups;
    AggregationResult result;
    for (auto& [id, group] : by_image) {
        if (group.size() < min_responses) {
            result.unfinalized.push_back(id);
        } else {
            groups.push_back(&group);
        }
    }
    result.annotations.resize(groups.size());
    const auto count = static_cast<long>(groups.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < count; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            result.annotations[k] = aggregate_image(*groups[k], min_responses);
        } catch (...) {
#pragma omp critical(vsa_aggregate_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return result;
}

}  // namespace vsa::crowd
