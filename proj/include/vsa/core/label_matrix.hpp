#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vsa {

/// N x C binary sample-by-class matrix, row-major.
///
/// Sample ids are unique in a base matrix; resampled data is expressed as an
/// index multiset over the base rows rather than a matrix with repeated ids.
class LabelMatrix {
public:
    LabelMatrix() = default;
    LabelMatrix(std::vector<std::string> sample_ids, std::vector<std::string> class_names);
    LabelMatrix(std::vector<std::string> sample_ids, std::vector<std::string> class_names,
                std::vector<std::uint8_t> cells);

    /// One-hot matrix from per-sample class indices.
    static LabelMatrix from_single_labels(std::vector<std::string> sample_ids,
                                          std::vector<std::string> class_names,
                                          std::span<const std::size_t> labels);

    std::size_t rows() const noexcept { return sample_ids_.size(); }
    std::size_t cols() const noexcept { return class_names_.size(); }

    const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    const std::vector<std::uint8_t>& cells() const noexcept { return cells_; }

    std::uint8_t at(std::size_t row, std::size_t col) const { return cells_[row * cols() + col]; }
    void set(std::size_t row, std::size_t col, bool value) {
        cells_[row * cols() + col] = value ? 1 : 0;
    }
    std::span<const std::uint8_t> row(std::size_t r) const {
        return {cells_.data() + r * cols(), cols()};
    }

    std::vector<std::uint8_t> column(std::size_t col) const;

    /// True when every row has exactly one set cell.
    bool is_single_label() const;

    /// Argmax of each row; only meaningful for single-label matrices.
    std::vector<std::size_t> single_labels() const;

    /// Matrix restricted to the given rows, in the given order.
    LabelMatrix select_rows(std::span<const std::size_t> indices) const;

    /// Throws Error(duplicate) on repeated sample ids or class names.
    void validate() const;

    friend bool operator==(const LabelMatrix&, const LabelMatrix&) = default;

private:
    std::vector<std::string> sample_ids_;
    std::vector<std::string> class_names_;
    std::vector<std::uint8_t> cells_;
};

}  // namespace vsa
