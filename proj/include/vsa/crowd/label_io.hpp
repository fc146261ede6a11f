#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vsa/core/label_matrix.hpp"
#include "vsa/corpus/label_sets.hpp"
#include "vsa/crowd/aggregate.hpp"

namespace vsa::crowd {

std::string label_file_name(corpus::LabelSetId set);  // "labels_set3.csv"

struct LabelExport {
    std::vector<std::filesystem::path> files;  // one per label set, SET1..SET4
    std::vector<std::string> excluded;         // unfinalized image ids
};

/// Writes labels_set{1..4}.csv into `out_dir` (created if needed).
/// SET1/SET2 carry one `label` column; SET3/SET4 carry one 0/1 column per
/// tag in canonical order. Annotations below `min_annotators` are excluded
/// and listed in the result.
LabelExport export_label_sets(std::span<const AggregatedAnnotation> annotations,
                              const std::filesystem::path& out_dir,
                              std::size_t min_annotators = kDefaultMinAnnotators);

/// Reads a label file back into a LabelMatrix with canonical class names.
/// When `set` is omitted it is inferred from the header (single-label files
/// are ambiguous between SET1 and SET2 and are resolved by their values).
LabelMatrix read_label_file(const std::filesystem::path& path,
                            std::optional<corpus::LabelSetId> set = std::nullopt);

/// Label set a file belongs to, per the same inference rule.
corpus::LabelSetId detect_label_set(const std::filesystem::path& path);

}  // namespace vsa::crowd
