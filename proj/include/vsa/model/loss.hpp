#pragma once

#include <cstddef>
#include <span>

#include "vsa/core/label_matrix.hpp"
#include "vsa/model/classifier.hpp"
#include "vsa/model/tensor.hpp"

namespace vsa::model {

struct LossResult {
    double value = 0.0;
    /// d(value)/d(logits), same shape as the logits.
    Tensor grad_logits;
};

/// Mean categorical cross-entropy of softmax(logits) over the batch.
/// Targets must be one-hot rows.
LossResult softmax_cross_entropy(const Tensor& logits, const Tensor& targets);

/// Mean over batch and classes of the binary cross-entropy of
/// sigmoid(logits). Targets must be 0/1.
LossResult sigmoid_binary_cross_entropy(const Tensor& logits, const Tensor& targets);

LossResult loss_from_logits(const Tensor& logits, const Tensor& targets, HeadMode mode);

/// Loss on a score matrix (probabilities), clamped to [1e-12, 1 - 1e-12]
/// before taking logarithms. Throws Error(shape_mismatch) when shapes differ
/// and Error(invalid_argument) for targets outside {0,1} or a single-label
/// target row that is not one-hot. An empty batch has loss 0.
double loss(const Tensor& scores, const Tensor& targets, HeadMode mode);

/// Target tensor [rows, C] from the given rows of a label matrix.
Tensor targets_from_labels(const LabelMatrix& labels, std::span<const std::size_t> rows);

}  // namespace vsa::model
