#include "vsa/crowd/stats.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

#include "vsa/core/error.hpp"

namespace vsa::crowd {

using corpus::LabelSetId;

std::vector<TagCombination> cooccurrence(std::span<const std::vector<std::size_t>> tag_sets,
                                         std::size_t arity) {
    if (arity != 2 && arity != 3) {
        throw Error(ErrorKind::invalid_argument, "co-occurrence arity must be 2 or 3");
    }
    std::map<std::vector<std::size_t>, std::size_t> counts;
    std::vector<std::size_t> tags;
    for (const auto& set : tag_sets) {
        tags.assign(set.begin(), set.end());
        std::sort(tags.begin(), tags.end());
        tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
        const auto n = tags.size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (arity == 2) {
                    ++counts[{tags[i], tags[j]}];
                    continue;
                }
                for (std::size_t k = j + 1; k < n; ++k) ++counts[{tags[i], tags[j], tags[k]}];
            }
        }
    }
    std::vector<TagCombination> out;
    out.reserve(counts.size());
    for (auto& [combo, count] : counts) out.push_back({combo, count});
    // Map order is already lexicographic; a stable sort keeps it for ties.
    std::stable_sort(out.begin(), out.end(),
                     [](const TagCombination& a, const TagCombination& b) { return a.count > b.count; });
    return out;
}

std::vector<TagCombination> cooccurrence(std::span<const AggregatedAnnotation> annotations, LabelSetId set,
                                         std::size_t arity) {
    if (corpus::is_scale_set(set)) {
        throw Error(ErrorKind::invalid_argument, "co-occurrence applies to SET3 and SET4 only");
    }
    std::vector<std::vector<std::size_t>> sets;
    sets.reserve(annotations.size());
    for (const auto& a : annotations) sets.push_back(a.tagset(set));
    return cooccurrence(sets, arity);
}

std::vector<HistogramBucket> question_distribution(std::span<const CrowdResponse> responses, Question q) {
    if (responses.empty()) {
        throw Error(ErrorKind::invalid_argument, "question distribution needs at least one response");
    }
    std::vector<HistogramBucket> buckets;
    if (q == Question::q5) {
        for (auto name : kInfluenceNames) buckets.push_back({std::string(name), 0, 0.0});
        for (const auto& r : responses) {
            for (auto f : r.q5_features) ++buckets[static_cast<std::size_t>(f)].count;
        }
    } else {
        for (int v = 1; v <= 10; ++v) buckets.push_back({std::to_string(v), 0, 0.0});
        for (const auto& r : responses) {
            const int v = q == Question::q1 ? r.q1 : r.q2;
            if (v >= 1 && v <= 10) ++buckets[static_cast<std::size_t>(v - 1)].count;
        }
    }
    std::size_t total = 0;
    for (const auto& b : buckets) total += b.count;
    if (total > 0) {
        for (auto& b : buckets) b.percent = 100.0 * static_cast<double>(b.count) / static_cast<double>(total);
    }
    return buckets;
}

namespace {

nlohmann::ordered_json histogram_json(const std::vector<HistogramBucket>& buckets) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& b : buckets) {
        arr.push_back({{"bucket", b.name}, {"count", b.count}, {"percent", b.percent}});
    }
    return arr;
}

nlohmann::ordered_json ranking_json(const std::vector<TagCombination>& combos, LabelSetId set,
                                    std::size_t top_k) {
    auto arr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < combos.size() && i < top_k; ++i) {
        auto names = nlohmann::ordered_json::array();
        for (auto t : combos[i].tags) names.push_back(std::string(corpus::tags(set)[t]));
        arr.push_back({{"tags", names}, {"count", combos[i].count}});
    }
    return arr;
}

}  // namespace

void write_stats_report(const std::filesystem::path& path, std::span<const CrowdResponse> responses,
                        std::span<const AggregatedAnnotation> annotations, std::size_t top_k) {
    nlohmann::ordered_json doc;
    doc["responses"] = responses.size();
    doc["images"] = annotations.size();
    doc["q1"] = histogram_json(question_distribution(responses, Question::q1));
    doc["q2"] = histogram_json(question_distribution(responses, Question::q2));
    doc["q5"] = histogram_json(question_distribution(responses, Question::q5));

    // Per-response sentiment buckets of Q1 (negative / neutral / positive).
    std::array<std::size_t, 3> buckets{};
    for (const auto& r : responses) ++buckets[map_scale_to_class(r.q1, LabelSetId::set1)];
    auto sentiment = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < 3; ++c) {
        sentiment[std::string(corpus::tags(LabelSetId::set1)[c])] = {
            {"count", buckets[c]},
            {"percent", 100.0 * static_cast<double>(buckets[c]) / static_cast<double>(responses.size())}};
    }
    doc["q1_sentiment"] = sentiment;

    auto tag_counts = [&](LabelSetId set) {
        std::vector<std::size_t> counts(corpus::tags(set).size(), 0);
        for (const auto& a : annotations) {
            for (auto t : a.tagset(set)) ++counts[t];
        }
        auto obj = nlohmann::ordered_json::object();
        for (std::size_t t = 0; t < counts.size(); ++t) obj[std::string(corpus::tags(set)[t])] = counts[t];
        return obj;
    };
    for (auto set : {LabelSetId::set3, LabelSetId::set4}) {
        const auto key = set == LabelSetId::set3 ? "set3" : "set4";
        doc["cooccurrence"][key] = {
            {"tag_counts", tag_counts(set)},
            {"pairs", ranking_json(cooccurrence(annotations, set, 2), set, top_k)},
            {"triples", ranking_json(cooccurrence(annotations, set, 3), set, top_k)}};
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::not_found, "cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

}  // namespace vsa::crowd
