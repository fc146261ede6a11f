#pragma once

// Binary container shared by backbone weight files (.vsw) and classifier
// checkpoints:
//
//   magic[8] | u32 version | u64 header_bytes | JSON header
//   | u64 parameter_count | parameter_count little-endian f64 | u32 crc32
//
// The CRC covers every preceding byte. The JSON header describes the network
// topology and preprocessing; parameters follow in layer order, weights
// before biases.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vsa/model/backbone.hpp"
#include "vsa/model/classifier.hpp"

namespace vsa::model {

inline constexpr std::uint32_t kWeightsFormatVersion = 1;
inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

nlohmann::json layer_to_json(const LayerConfig& config);
LayerConfig layer_from_json(const nlohmann::json& j);
nlohmann::json preprocessing_to_json(const Preprocessing& p);
Preprocessing preprocessing_from_json(const nlohmann::json& j);

void write_weights_file(const std::filesystem::path& path, const Backbone& backbone);

/// Throws Error(not_found), Error(corrupt) for truncated or damaged files and
/// Error(version_mismatch) for a newer format.
Backbone read_weights_file(const std::filesystem::path& path);

struct Checkpoint {
    Classifier classifier;
    std::string task;  // "TASK1".."TASK3"
    std::vector<std::string> class_names;
    /// Free-form run metadata (training history, resolved config).
    nlohmann::json metadata;
};

void save_checkpoint(const std::filesystem::path& path, const Classifier& classifier, std::string_view task,
                     std::span<const std::string> class_names, const nlohmann::json& metadata = {});

/// Throws Error(not_found) ("checkpoint not found"), Error(corrupt),
/// Error(version_mismatch), and Error(task_mismatch) when `expected_task` is
/// given and differs from the stored task.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<std::string_view> expected_task = std::nullopt);

}  // namespace vsa::model
