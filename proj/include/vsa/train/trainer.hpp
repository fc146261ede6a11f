#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "vsa/core/label_matrix.hpp"
#include "vsa/corpus/splits.hpp"
#include "vsa/eval/metrics.hpp"
#include "vsa/model/classifier.hpp"
#include "vsa/resample/oversample.hpp"
#include "vsa/train/config.hpp"
#include "vsa/train/data_source.hpp"

namespace vsa::train {

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    /// NaN when the validation split is empty.
    double val_loss = 0.0;
    double val_f1 = 0.0;  // macro F1
    double seconds = 0.0;
    std::size_t samples = 0;  // training samples drawn this epoch
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    /// Epoch whose weights were returned; empty when no epoch ran.
    std::optional<std::size_t> best_epoch;
    bool stopped_early = false;
};

/// `history.csv`: epoch,train_loss,val_loss,val_f1,seconds
void write_history_csv(const std::filesystem::path& path, const TrainHistory& history);
nlohmann::json history_to_json(const TrainHistory& history);

/// Called once per training batch with the image indices it contains.
using BatchObserver = std::function<void(std::size_t epoch, std::span<const std::size_t> indices)>;

struct TrainResult {
    model::Classifier classifier;
    TrainHistory history;
    /// Present when oversampling was enabled; indices refer to train-split
    /// positions.
    std::optional<resample::ResamplePlan> plan;
    /// Image indices visited in every epoch (before shuffling).
    std::vector<std::size_t> epoch_samples;
};

/// Fine-tunes `classifier` on the train split of `labels` (rows aligned with
/// `images`), keeping the weights of the best validation epoch.
///
/// Each epoch visits the train split, or its oversampled multiset when
/// oversampling is on, in an order shuffled with a seed derived from
/// (config.seed, epoch). Validation and test rows never reach the optimizer.
///
/// Throws Error(shape_mismatch) when labels, images, splits, task and head
/// disagree, Error(invalid_argument) for an invalid config or non-one-hot
/// single-label rows, and Error(non_finite) when the loss diverges.
TrainResult finetune(model::Classifier classifier, const ImageSource& images, const LabelMatrix& labels,
                     const corpus::SplitAssignment& splits, const TrainConfig& config,
                     const BatchObserver& observer = {});

struct SplitEvaluation {
    double loss = 0.0;
    eval::MetricsReport report;
    model::Tensor scores;
};

/// Scores the given rows in batches and evaluates them against `labels`.
SplitEvaluation evaluate_rows(const model::Classifier& classifier, const ImageSource& images,
                              const LabelMatrix& labels, std::span<const std::size_t> rows,
                              std::size_t batch_size = 32, bool parallel_loading = false);

}  // namespace vsa::train
