#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vsa::corpus {

enum class LabelSetId { set1, set2, set3, set4 };

inline constexpr std::array<LabelSetId, 4> all_label_sets{LabelSetId::set1, LabelSetId::set2,
                                                          LabelSetId::set3, LabelSetId::set4};

/// Canonical tag order; it drives tie-breaking and file column order.
std::span<const std::string_view> tags(LabelSetId id);

std::string_view name(LabelSetId id);              // "SET1"
std::optional<LabelSetId> parse_label_set(std::string_view text);

/// SET1/SET2 are answered on a rating scale (one label per image);
/// SET3/SET4 are tag sets.
bool is_scale_set(LabelSetId id);

/// The class a tie between rating buckets falls back to.
std::size_t neutral_index(LabelSetId id);

/// Position of `tag` in the canonical order (case-insensitive, trimmed).
std::optional<std::size_t> tag_index(LabelSetId id, std::string_view tag);

std::vector<std::string> tag_names(LabelSetId id);

}  // namespace vsa::corpus
