#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace vsa::model {

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape);

/// Dense row-major double tensor. Dimension 0 is the batch.
struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s, double fill = 0.0) : shape(std::move(s)), data(element_count(shape), fill) {}
    Tensor(Shape s, std::vector<double> values);

    std::size_t size() const noexcept { return data.size(); }
    std::size_t batch() const noexcept { return shape.empty() ? 0 : shape[0]; }
    std::size_t per_sample() const noexcept {
        return batch() == 0 ? element_count(Shape(shape.begin() + (shape.empty() ? 0 : 1), shape.end()))
                            : data.size() / batch();
    }

    double& at(std::size_t row, std::size_t col) { return data[row * shape[1] + col]; }
    double at(std::size_t row, std::size_t col) const { return data[row * shape[1] + col]; }

    std::span<double> sample(std::size_t n) { return {data.data() + n * per_sample(), per_sample()}; }
    std::span<const double> sample(std::size_t n) const {
        return {data.data() + n * per_sample(), per_sample()};
    }

    /// New tensor holding the given samples of this one, in order.
    Tensor gather(std::span<const std::size_t> rows) const;

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

}  // namespace vsa::model
