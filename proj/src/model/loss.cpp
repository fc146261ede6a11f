#include "vsa/model/loss.hpp"

#include <algorithm>
#include <cmath>

#include "vsa/core/error.hpp"
#include "vsa/model/kernels.hpp"

namespace vsa::model {
namespace {

constexpr double kClamp = 1e-12;

void check_targets(const Tensor& predictions, const Tensor& targets, HeadMode mode) {
    if (predictions.shape != targets.shape || predictions.shape.size() != 2) {
        throw Error(ErrorKind::shape_mismatch, "scores " + to_string(predictions.shape) + " and targets " +
                                                   to_string(targets.shape) + " differ in shape");
    }
    const auto cols = targets.shape[1];
    for (std::size_t i = 0; i < targets.batch(); ++i) {
        std::size_t ones = 0;
        for (std::size_t j = 0; j < cols; ++j) {
            const double t = targets.at(i, j);
            if (t != 0.0 && t != 1.0) throw Error(ErrorKind::invalid_argument, "targets must be 0 or 1");
            ones += t == 1.0;
        }
        if (mode == HeadMode::single_label && ones != 1) {
            throw Error(ErrorKind::invalid_argument, "single-label targets must be one-hot");
        }
    }
}

}  // namespace

LossResult softmax_cross_entropy(const Tensor& logits, const Tensor& targets) {
    check_targets(logits, targets, HeadMode::single_label);
    const auto n = logits.batch();
    const auto c = logits.shape[1];
    LossResult result{0.0, Tensor(logits.shape)};
    if (n == 0) return result;
    kernels::softmax_rows(n, c, logits.data, result.grad_logits.data);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = logits.sample(i);
        const double peak = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double z : row) sum += std::exp(z - peak);
        const double log_norm = peak + std::log(sum);
        for (std::size_t j = 0; j < c; ++j) {
            const double t = targets.at(i, j);
            if (t == 1.0) result.value += log_norm - row[j];
            result.grad_logits.at(i, j) = (result.grad_logits.at(i, j) - t) * scale;
        }
    }
    result.value *= scale;
    return result;
}

LossResult sigmoid_binary_cross_entropy(const Tensor& logits, const Tensor& targets) {
    check_targets(logits, targets, HeadMode::multi_label);
    LossResult result{0.0, Tensor(logits.shape)};
    if (logits.size() == 0) return result;
    kernels::sigmoid(logits.data, result.grad_logits.data);
    const double scale = 1.0 / static_cast<double>(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) {
        const double z = logits.data[k];
        const double t = targets.data[k];
        // log(1 + e^z) - t z, written to stay finite for large |z|
        result.value += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
        result.grad_logits.data[k] = (result.grad_logits.data[k] - t) * scale;
    }
    result.value *= scale;
    return result;
}

LossResult loss_from_logits(const Tensor& logits, const Tensor& targets, HeadMode mode) {
    return mode == HeadMode::single_label ? softmax_cross_entropy(logits, targets)
                                          : sigmoid_binary_cross_entropy(logits, targets);
}

double loss(const Tensor& scores, const Tensor& targets, HeadMode mode) {
    check_targets(scores, targets, mode);
    if (scores.size() == 0) return 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        const double p = std::clamp(scores.data[k], kClamp, 1.0 - kClamp);
        const double t = targets.data[k];
        if (mode == HeadMode::single_label) {
            if (t == 1.0) total -= std::log(p);
        } else {
            total -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
        }
    }
    const double denom = static_cast<double>(mode == HeadMode::single_label ? scores.batch() : scores.size());
    return total / denom;
}

Tensor targets_from_labels(const LabelMatrix& labels, std::span<const std::size_t> rows) {
    Tensor out({rows.size(), labels.cols()});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= labels.rows()) throw Error(ErrorKind::out_of_range, "label row out of range");
        const auto row = labels.row(rows[i]);
        std::copy(row.begin(), row.end(), out.sample(i).begin());
    }
    return out;
}

}  // namespace vsa::model
