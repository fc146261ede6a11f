#include "vsa/corpus/label_sets.hpp"

#include <algorithm>
#include <cctype>

#include "vsa/core/csv.hpp"

namespace vsa::corpus {
namespace {

constexpr std::array<std::string_view, 3> kSet1{"positive", "negative", "neutral"};
constexpr std::array<std::string_view, 3> kSet2{"relax", "stimulated", "normal"};
constexpr std::array<std::string_view, 7> kSet3{"joy",   "sadness",  "fear",   "disgust",
                                                "anger", "surprise", "neutral"};
constexpr std::array<std::string_view, 10> kSet4{
    "anger", "anxiety", "craving", "empathetic pain", "fear",
    "horror", "joy",    "relief",  "sadness",         "surprise"};

std::string lowercase(std::string_view text) {
    std::string out = csv::trim(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::span<const std::string_view> tags(LabelSetId id) {
    switch (id) {
        case LabelSetId::set1: return kSet1;
        case LabelSetId::set2: return kSet2;
        case LabelSetId::set3: return kSet3;
        case LabelSetId::set4: return kSet4;
    }
    return {};
}

std::string_view name(LabelSetId id) {
    switch (id) {
        case LabelSetId::set1: return "SET1";
        case LabelSetId::set2: return "SET2";
        case LabelSetId::set3: return "SET3";
        case LabelSetId::set4: return "SET4";
    }
    return "";
}

std::optional<LabelSetId> parse_label_set(std::string_view text) {
    const auto lowered = lowercase(text);
    for (auto id : all_label_sets) {
        if (lowercase(name(id)) == lowered) return id;
    }
    return std::nullopt;
}

bool is_scale_set(LabelSetId id) { return id == LabelSetId::set1 || id == LabelSetId::set2; }

std::size_t neutral_index(LabelSetId id) {
    switch (id) {
        case LabelSetId::set1: return 2;  // neutral
        case LabelSetId::set2: return 2;  // normal
        case LabelSetId::set3: return 6;  // neutral
        case LabelSetId::set4: return 0;  // no neutral tag; canonical order decides
    }
    return 0;
}

std::optional<std::size_t> tag_index(LabelSetId id, std::string_view tag) {
    const auto lowered = lowercase(tag);
    const auto list = tags(id);
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (list[i] == lowered) return i;
    }
    return std::nullopt;
}

std::vector<std::string> tag_names(LabelSetId id) {
    const auto list = tags(id);
    return {list.begin(), list.end()};
}

}  // namespace vsa::corpus
