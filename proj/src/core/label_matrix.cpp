#include "vsa/core/label_matrix.hpp"

#include <algorithm>
#include <unordered_set>

#include "vsa/core/error.hpp"

namespace vsa {

LabelMatrix::LabelMatrix(std::vector<std::string> sample_ids, std::vector<std::string> class_names)
    : sample_ids_(std::move(sample_ids)),
      class_names_(std::move(class_names)),
      cells_(sample_ids_.size() * class_names_.size(), 0) {}

LabelMatrix::LabelMatrix(std::vector<std::string> sample_ids, std::vector<std::string> class_names,
                         std::vector<std::uint8_t> cells)
    : sample_ids_(std::move(sample_ids)),
      class_names_(std::move(class_names)),
      cells_(std::move(cells)) {
    if (cells_.size() != sample_ids_.size() * class_names_.size()) {
        throw Error(ErrorKind::shape_mismatch, "label matrix cell count does not match " +
                                                   std::to_string(sample_ids_.size()) + "x" +
                                                   std::to_string(class_names_.size()));
    }
    for (auto& c : cells_) {
        if (c > 1) throw Error(ErrorKind::out_of_range, "label matrix cells must be 0 or 1");
    }
}

LabelMatrix LabelMatrix::from_single_labels(std::vector<std::string> sample_ids,
                                            std::vector<std::string> class_names,
                                            std::span<const std::size_t> labels) {
    if (labels.size() != sample_ids.size()) {
        throw Error(ErrorKind::shape_mismatch, "label count does not match sample count");
    }
    LabelMatrix m(std::move(sample_ids), std::move(class_names));
    for (std::size_t r = 0; r < labels.size(); ++r) {
        if (labels[r] >= m.cols()) {
            throw Error(ErrorKind::out_of_range, "class index " + std::to_string(labels[r]) +
                                                     " outside " + std::to_string(m.cols()) +
                                                     " classes");
        }
        m.set(r, labels[r], true);
    }
    return m;
}

std::vector<std::uint8_t> LabelMatrix::column(std::size_t col) const {
    std::vector<std::uint8_t> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, col);
    return out;
}

bool LabelMatrix::is_single_label() const {
    for (std::size_t r = 0; r < rows(); ++r) {
        const auto cells = row(r);
        if (std::count(cells.begin(), cells.end(), std::uint8_t{1}) != 1) return false;
    }
    return true;
}

std::vector<std::size_t> LabelMatrix::single_labels() const {
    std::vector<std::size_t> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) {
        const auto cells = row(r);
        out[r] = static_cast<std::size_t>(std::max_element(cells.begin(), cells.end()) - cells.begin());
    }
    return out;
}

LabelMatrix LabelMatrix::select_rows(std::span<const std::size_t> indices) const {
    std::vector<std::string> ids;
    std::vector<std::uint8_t> cells;
    ids.reserve(indices.size());
    cells.reserve(indices.size() * cols());
    for (auto i : indices) {
        if (i >= rows()) throw Error(ErrorKind::out_of_range, "row index out of range");
        ids.push_back(sample_ids_[i]);
        const auto r = row(i);
        cells.insert(cells.end(), r.begin(), r.end());
    }
    return LabelMatrix(std::move(ids), class_names_, std::move(cells));
}

void LabelMatrix::validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& name : class_names_) {
        if (!seen.insert(name).second) {
            throw Error(ErrorKind::duplicate, "duplicate class name '" + name + "'");
        }
    }
    seen.clear();
    for (const auto& id : sample_ids_) {
        if (!seen.insert(id).second) {
            throw Error(ErrorKind::duplicate, "duplicate sample id '" + id + "'");
        }
    }
}

}  // namespace vsa
