#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace vsa::corpus {

struct ImageRecord {
    std::string image_id;
    std::string relative_path;
    std::string keyword;
    std::string license;
    bool resolvable = true;  // false when relative_path did not resolve at load time
};

class Manifest {
public:
    Manifest() = default;
    /// Throws Error(duplicate) naming the first repeated image_id.
    Manifest(std::vector<ImageRecord> records, std::filesystem::path base_dir);

    const std::vector<ImageRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    const std::filesystem::path& base_dir() const noexcept { return base_dir_; }

    std::optional<std::size_t> find(const std::string& image_id) const;
    std::filesystem::path resolve(const ImageRecord& record) const;

    /// Warnings produced while loading (empty manifest, unresolvable paths).
    std::vector<std::string> warnings;

private:
    std::vector<ImageRecord> records_;
    std::filesystem::path base_dir_;
    std::unordered_map<std::string, std::size_t> index_;
};

inline const std::vector<std::string> kManifestHeader{"image_id", "relative_path", "keyword",
                                                      "license"};

/// Parses `manifest.csv`. Relative paths resolve against the manifest's
/// directory unless `image_root` is given.
Manifest load_manifest(const std::filesystem::path& path,
                       const std::optional<std::filesystem::path>& image_root = std::nullopt);

void write_manifest(const std::filesystem::path& path, const std::vector<ImageRecord>& records);

/// Builds records for every image file under `image_dir` (recursive). The
/// first directory component below `image_dir` becomes the keyword.
std::vector<ImageRecord> scan_image_directory(const std::filesystem::path& image_dir,
                                              const std::string& license);

}  // namespace vsa::corpus
