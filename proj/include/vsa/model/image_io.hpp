#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include "vsa/model/backbone.hpp"
#include "vsa/model/tensor.hpp"

namespace vsa::model {

/// Decodes an image file and preprocesses it into `out` (C*H*W values, CHW
/// order): the shorter side is scaled to H*256/224, the center HxW crop is
/// kept, and channels are scaled to [0,1] and normalized with the mean and
/// standard deviation. Throws Error(not_found) for a missing file and
/// Error(parse) for an undecodable one.
void load_image_into(const std::filesystem::path& path, const Preprocessing& p, std::span<double> out);

/// Same as load_image_into, returning a [1, C, H, W] tensor.
Tensor load_image(const std::filesystem::path& path, const Preprocessing& p);

/// Preprocesses an interleaved RGB8 buffer of the given size.
void preprocess_rgb(std::span<const std::uint8_t> rgb, std::size_t height, std::size_t width,
                    const Preprocessing& p, std::span<double> out);

/// Writes an interleaved RGB8 buffer as an image (format from the extension).
void write_rgb_image(const std::filesystem::path& path, std::span<const std::uint8_t> rgb, std::size_t height,
                     std::size_t width);

}  // namespace vsa::model
