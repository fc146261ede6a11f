#include "vsa/crowd/label_io.hpp"

#include <fstream>

#include "vsa/core/csv.hpp"
#include "vsa/core/error.hpp"

namespace vsa::crowd {

namespace fs = std::filesystem;
using corpus::LabelSetId;

std::string label_file_name(LabelSetId set) {
    return "labels_set" + std::to_string(static_cast<int>(set) + 1) + ".csv";
}

namespace {

std::vector<std::string> header_for(LabelSetId set) {
    std::vector<std::string> header{"image_id"};
    if (corpus::is_scale_set(set)) {
        header.emplace_back("label");
    } else {
        const auto names = corpus::tag_names(set);
        header.insert(header.end(), names.begin(), names.end());
    }
    return header;
}

std::vector<std::string> row_for(const AggregatedAnnotation& a, LabelSetId set) {
    std::vector<std::string> row{a.image_id};
    if (corpus::is_scale_set(set)) {
        const auto label = set == LabelSetId::set1 ? a.set1_label : a.set2_label;
        row.emplace_back(corpus::tags(set)[label]);
    } else {
        std::vector<std::string> cells(corpus::tags(set).size(), "0");
        for (auto t : a.tagset(set)) cells.at(t) = "1";
        row.insert(row.end(), cells.begin(), cells.end());
    }
    return row;
}

}  // namespace

LabelExport export_label_sets(std::span<const AggregatedAnnotation> annotations, const fs::path& out_dir,
                              std::size_t min_annotators) {
    fs::create_directories(out_dir);
    LabelExport result;
    std::vector<const AggregatedAnnotation*> kept;
    for (const auto& a : annotations) {
        if (a.finalized(min_annotators)) {
            kept.push_back(&a);
        } else {
            result.excluded.push_back(a.image_id);
        }
    }
    for (auto set : corpus::all_label_sets) {
        const auto path = out_dir / label_file_name(set);
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorKind::not_found, "cannot write '" + path.string() + "'");
        out << csv::join_row(header_for(set)) << '\n';
        for (const auto* a : kept) out << csv::join_row(row_for(*a, set)) << '\n';
        result.files.push_back(path);
    }
    return result;
}

namespace {

LabelSetId infer(const csv::Table& table, const fs::path& path) {
    if (table.header.size() == 2 && table.header[1] == "label") {
        for (const auto& row : table.rows) {
            if (row.fields.size() < 2) continue;
            if (corpus::tag_index(LabelSetId::set2, row.fields[1]) &&
                !corpus::tag_index(LabelSetId::set1, row.fields[1])) {
                return LabelSetId::set2;
            }
        }
        return LabelSetId::set1;
    }
    for (auto set : {LabelSetId::set3, LabelSetId::set4}) {
        if (table.header == header_for(set)) return set;
    }
    throw Error(ErrorKind::parse, "'" + path.string() + "': header matches no label set");
}

}  // namespace

LabelSetId detect_label_set(const fs::path& path) { return infer(csv::read_file(path), path); }

LabelMatrix read_label_file(const fs::path& path, std::optional<LabelSetId> set) {
    const auto table = csv::read_file(path);
    const auto id = set ? *set : infer(table, path);
    csv::require_header(table, header_for(id), path);

    std::vector<std::string> ids;
    std::vector<std::uint8_t> cells;
    const auto classes = corpus::tag_names(id);
    for (const auto& row : table.rows) {
        const auto where = path.string() + ":" + std::to_string(row.line);
        if (row.fields.size() != table.header.size()) {
            throw Error(ErrorKind::parse, where + ": wrong field count");
        }
        ids.push_back(row.fields[0]);
        if (corpus::is_scale_set(id)) {
            const auto idx = corpus::tag_index(id, row.fields[1]);
            if (!idx) throw Error(ErrorKind::parse, where + ": unknown label '" + row.fields[1] + "'");
            for (std::size_t c = 0; c < classes.size(); ++c) cells.push_back(c == *idx ? 1 : 0);
        } else {
            for (std::size_t c = 1; c < row.fields.size(); ++c) {
                const auto& v = row.fields[c];
                if (v != "0" && v != "1") {
                    throw Error(ErrorKind::parse, where + ": cell '" + v + "' is not 0 or 1");
                }
                cells.push_back(v == "1" ? 1 : 0);
            }
        }
    }
    LabelMatrix m(std::move(ids), classes, std::move(cells));
    m.validate();
    return m;
}

}  // namespace vsa::crowd
