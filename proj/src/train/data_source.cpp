#include "vsa/train/data_source.hpp"

#include <algorithm>
#include <exception>

#include "vsa/core/error.hpp"
#include "vsa/model/image_io.hpp"

namespace vsa::train {

model::Tensor ImageSource::batch(std::span<const std::size_t> indices, bool parallel) const {
    auto shape = sample_shape();
    const auto stride = model::element_count(shape);
    shape.insert(shape.begin(), indices.size());
    model::Tensor out(shape);
    for (auto index : indices) {
        if (index >= size()) throw Error(ErrorKind::out_of_range, "image index out of range");
    }
    std::exception_ptr failure;
    const auto n = static_cast<std::ptrdiff_t>(indices.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            load(indices[static_cast<std::size_t>(i)],
                 std::span<double>(out.data).subspan(static_cast<std::size_t>(i) * stride, stride));
        } catch (...) {
#pragma omp critical(vsa_batch_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

InMemoryImages::InMemoryImages(model::Tensor images) : images_(std::move(images)) {
    if (images_.shape.size() != 4) {
        throw Error(ErrorKind::shape_mismatch, "in-memory images must be [N, C, H, W]");
    }
}

model::Shape InMemoryImages::sample_shape() const {
    return model::Shape(images_.shape.begin() + 1, images_.shape.end());
}

void InMemoryImages::load(std::size_t index, std::span<double> out) const {
    const auto src = images_.sample(index);
    if (out.size() != src.size()) throw Error(ErrorKind::shape_mismatch, "sample buffer has the wrong size");
    std::copy(src.begin(), src.end(), out.begin());
}

DiskImages::DiskImages(std::vector<std::filesystem::path> paths, model::Preprocessing preprocessing)
    : paths_(std::move(paths)), preprocessing_(preprocessing) {}

model::Shape DiskImages::sample_shape() const {
    return {preprocessing_.channels, preprocessing_.height, preprocessing_.width};
}

void DiskImages::load(std::size_t index, std::span<double> out) const {
    model::load_image_into(paths_.at(index), preprocessing_, out);
}

}  // namespace vsa::train
