#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "vsa/model/backbone.hpp"
#include "vsa/model/tensor.hpp"

namespace vsa::train {

/// Indexed collection of preprocessed images.
class ImageSource {
public:
    virtual ~ImageSource() = default;
    virtual std::size_t size() const = 0;
    /// Shape of one sample, e.g. {3, 224, 224}.
    virtual model::Shape sample_shape() const = 0;
    /// Writes sample `index` into `out` (element_count(sample_shape()) values).
    virtual void load(std::size_t index, std::span<double> out) const = 0;

    /// Batch of the given samples, in order. With `parallel` the samples are
    /// loaded by several threads; the result is the same either way.
    model::Tensor batch(std::span<const std::size_t> indices, bool parallel = false) const;
};

/// Images already held in memory as one [N, C, H, W] tensor.
class InMemoryImages final : public ImageSource {
public:
    explicit InMemoryImages(model::Tensor images);

    std::size_t size() const override { return images_.batch(); }
    model::Shape sample_shape() const override;
    void load(std::size_t index, std::span<double> out) const override;

private:
    model::Tensor images_;
};

/// Image files decoded and preprocessed on demand.
class DiskImages final : public ImageSource {
public:
    DiskImages(std::vector<std::filesystem::path> paths, model::Preprocessing preprocessing);

    std::size_t size() const override { return paths_.size(); }
    model::Shape sample_shape() const override;
    void load(std::size_t index, std::span<double> out) const override;

private:
    std::vector<std::filesystem::path> paths_;
    model::Preprocessing preprocessing_;
};

}  // namespace vsa::train
