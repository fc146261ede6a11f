#include "vsa/corpus/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "vsa/core/csv.hpp"
#include "vsa/core/error.hpp"

namespace vsa::corpus {

namespace fs = std::filesystem;

Manifest::Manifest(std::vector<ImageRecord> records, fs::path base_dir)
    : records_(std::move(records)), base_dir_(std::move(base_dir)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        if (!index_.emplace(records_[i].image_id, i).second) {
            throw Error(ErrorKind::duplicate, "duplicate image_id '" + records_[i].image_id + "'");
        }
    }
}

std::optional<std::size_t> Manifest::find(const std::string& image_id) const {
    const auto it = index_.find(image_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

fs::path Manifest::resolve(const ImageRecord& record) const {
    return base_dir_ / record.relative_path;
}

Manifest load_manifest(const fs::path& path, const std::optional<fs::path>& image_root) {
    if (!fs::exists(path)) {
        throw Error(ErrorKind::not_found, "manifest '" + path.string() + "' not found");
    }
    const auto table = csv::read_file(path);
    csv::require_header(table, kManifestHeader, path);

    std::vector<ImageRecord> records;
    records.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (row.fields.size() != kManifestHeader.size()) {
            throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(row.line) +
                                              ": expected 4 fields, got " +
                                              std::to_string(row.fields.size()));
        }
        if (row.fields[0].empty()) {
            throw Error(ErrorKind::parse,
                        path.string() + ":" + std::to_string(row.line) + ": empty image_id");
        }
        records.push_back({row.fields[0], row.fields[1], row.fields[2], row.fields[3], true});
    }

    const fs::path base = image_root ? *image_root : path.parent_path();
    std::vector<std::string> warnings;
    // Records are flagged, not dropped, so ids stay aligned with label files.
    for (auto& rec : records) {
        std::error_code ec;
        if (!fs::is_regular_file(base / rec.relative_path, ec)) {
            rec.resolvable = false;
            warnings.push_back("image '" + rec.image_id + "': path '" + rec.relative_path +
                               "' does not resolve to a readable file");
        }
    }
    if (records.empty()) {
        warnings.push_back("manifest '" + path.string() + "' contains no records");
    }
    Manifest manifest(std::move(records), base);
    manifest.warnings = std::move(warnings);
    return manifest;
}

void write_manifest(const fs::path& path, const std::vector<ImageRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::not_found, "cannot write '" + path.string() + "'");
    out << csv::join_row(kManifestHeader) << '\n';
    for (const auto& r : records) {
        out << csv::join_row({r.image_id, r.relative_path, r.keyword, r.license}) << '\n';
    }
}

std::vector<ImageRecord> scan_image_directory(const fs::path& image_dir, const std::string& license) {
    if (!fs::is_directory(image_dir)) {
        throw Error(ErrorKind::not_found, "image directory '" + image_dir.string() + "' not found");
    }
    static const std::vector<std::string> extensions{".jpg", ".jpeg", ".png", ".bmp", ".webp"};
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(image_dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (std::find(extensions.begin(), extensions.end(), ext) != extensions.end()) {
            files.push_back(fs::relative(entry.path(), image_dir));
        }
    }
    std::sort(files.begin(), files.end());

    std::vector<ImageRecord> records;
    records.reserve(files.size());
    for (const auto& rel : files) {
        ImageRecord rec;
        auto stem = rel;
        stem.replace_extension();
        rec.image_id = stem.generic_string();
        std::replace(rec.image_id.begin(), rec.image_id.end(), '/', '_');
        rec.relative_path = rel.generic_string();
        rec.keyword = std::distance(rel.begin(), rel.end()) > 1 ? rel.begin()->string() : "unknown";
        rec.license = license;
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace vsa::corpus
