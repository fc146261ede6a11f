#include "vsa/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "vsa/core/csv.hpp"
#include "vsa/core/error.hpp"
#include "vsa/core/rng.hpp"
#include "vsa/model/loss.hpp"
#include "vsa/train/optimizer.hpp"

namespace vsa::train {
namespace {

void check_inputs(const model::Classifier& classifier, const ImageSource& images, const LabelMatrix& labels,
                  const corpus::SplitAssignment& splits, const TrainConfig& config) {
    const auto& task = task_info(config.task);
    if (classifier.head().mode != task.mode || classifier.num_classes() != task.num_classes) {
        throw Error(ErrorKind::shape_mismatch, std::string(task.name) + " needs a " +
                                                   std::string(model::to_string(task.mode)) + " head with " +
                                                   std::to_string(task.num_classes) + " classes");
    }
    if (labels.cols() != task.num_classes) {
        throw Error(ErrorKind::shape_mismatch, "label matrix has " + std::to_string(labels.cols()) +
                                                   " classes, " + std::string(task.name) + " has " +
                                                   std::to_string(task.num_classes));
    }
    if (labels.rows() != images.size()) {
        throw Error(ErrorKind::shape_mismatch, "label matrix has " + std::to_string(labels.rows()) +
                                                   " rows for " + std::to_string(images.size()) + " images");
    }
    std::vector<bool> seen(labels.rows(), false);
    for (const auto* part : {&splits.train, &splits.val, &splits.test}) {
        for (auto i : *part) {
            if (i >= labels.rows()) {
                throw Error(ErrorKind::shape_mismatch, "split index " + std::to_string(i) + " has no label row");
            }
            if (seen[i]) throw Error(ErrorKind::shape_mismatch, "index " + std::to_string(i) + " is in two splits");
            seen[i] = true;
            if (task.mode == model::HeadMode::single_label) {
                std::size_t ones = 0;
                for (auto v : labels.row(i)) ones += v;
                if (ones != 1) {
                    throw Error(ErrorKind::invalid_argument,
                                "row '" + labels.sample_ids()[i] + "' is not a single label");
                }
            }
        }
    }
}

std::vector<std::size_t> training_multiset(const LabelMatrix& labels, const corpus::SplitAssignment& splits,
                                           const TrainConfig& config, std::optional<resample::ResamplePlan>& plan) {
    if (config.oversample == OversampleMode::off || splits.train.empty()) return splits.train;
    const auto train_labels = labels.select_rows(splits.train);
    if (config.oversample == OversampleMode::single) {
        plan = resample::oversample_single_label(train_labels.single_labels(), train_labels.class_names(),
                                                 config.effective_rho(), config.seed);
    } else {
        plan = resample::oversample_multilabel(train_labels, config.effective_rho(), config.seed, config.growth_cap);
    }
    std::vector<std::size_t> out;
    out.reserve(plan->index_multiset.size());
    for (auto i : plan->index_multiset) out.push_back(splits.train[i]);
    return out;
}

void check_finite(double value, std::size_t epoch, std::size_t batch, const std::vector<double>& batch_losses) {
    if (std::isfinite(value)) return;
    std::string recent;
    const auto from = batch_losses.size() > 5 ? batch_losses.size() - 5 : 0;
    for (auto i = from; i < batch_losses.size(); ++i) recent += (recent.empty() ? "" : ", ") + csv::format_double(batch_losses[i]);
    throw Error(ErrorKind::non_finite, "non-finite training loss in epoch " + std::to_string(epoch) + ", batch " +
                                           std::to_string(batch) + " (preceding batch losses: " +
                                           (recent.empty() ? "none" : recent) +
                                           "); lower the learning rate or check the inputs");
}

}  // namespace

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::not_found, "cannot write '" + path.string() + "'");
    out << "epoch,train_loss,val_loss,val_f1,seconds\n";
    for (const auto& e : history.epochs) {
        out << csv::join_row({std::to_string(e.epoch), csv::format_double(e.train_loss),
                              csv::format_double(e.val_loss), csv::format_double(e.val_f1),
                              csv::format_double(e.seconds)})
            << '\n';
    }
}

nlohmann::json history_to_json(const TrainHistory& history) {
    nlohmann::json epochs = nlohmann::json::array();
    const auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    for (const auto& e : history.epochs) {
        epochs.push_back({{"epoch", e.epoch},
                          {"train_loss", num(e.train_loss)},
                          {"val_loss", num(e.val_loss)},
                          {"val_f1", num(e.val_f1)},
                          {"seconds", e.seconds},
                          {"samples", e.samples}});
    }
    return {{"epochs", epochs},
            {"best_epoch", history.best_epoch ? nlohmann::json(*history.best_epoch) : nlohmann::json(nullptr)},
            {"stopped_early", history.stopped_early}};
}

SplitEvaluation evaluate_rows(const model::Classifier& classifier, const ImageSource& images,
                              const LabelMatrix& labels, std::span<const std::size_t> rows, std::size_t batch_size,
                              bool parallel_loading) {
    if (batch_size == 0) throw Error(ErrorKind::invalid_argument, "batch_size must be positive");
    const auto c = classifier.num_classes();
    const auto mode = classifier.head().mode;
    SplitEvaluation result;
    result.scores = model::Tensor({rows.size(), c});
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < rows.size(); start += batch_size) {
        const auto chunk = rows.subspan(start, std::min(batch_size, rows.size() - start));
        const auto scores = classifier.forward(images.batch(chunk, parallel_loading));
        const auto targets = model::targets_from_labels(labels, chunk);
        loss_sum += model::loss(scores, targets, mode) * static_cast<double>(chunk.size());
        std::copy(scores.data.begin(), scores.data.end(), result.scores.data.begin() + static_cast<std::ptrdiff_t>(start * c));
    }
    result.loss = rows.empty() ? 0.0 : loss_sum / static_cast<double>(rows.size());

    const auto predicted = model::predict_labels(result.scores, classifier.head());
    const auto truth = labels.select_rows(rows);
    if (mode == model::HeadMode::single_label) {
        std::vector<std::size_t> pred;
        for (const auto& p : predicted) pred.push_back(p.front());
        result.report = eval::evaluate_single_label(pred, truth.single_labels(), labels.class_names());
    } else {
        LabelMatrix pred(truth.sample_ids(), labels.class_names());
        for (std::size_t i = 0; i < predicted.size(); ++i) {
            for (auto j : predicted[i]) pred.set(i, j, true);
        }
        result.report = eval::evaluate_multi_label(pred, truth);
    }
    return result;
}

TrainResult finetune(model::Classifier classifier, const ImageSource& images, const LabelMatrix& labels,
                     const corpus::SplitAssignment& splits, const TrainConfig& config,
                     const BatchObserver& observer) {
    config.validate();
    check_inputs(classifier, images, labels, splits, config);

    std::optional<resample::ResamplePlan> plan;
    auto samples = training_multiset(labels, splits, config, plan);
    TrainHistory history;
    if (config.epochs == 0 || samples.empty()) {
        return {std::move(classifier), std::move(history), std::move(plan), std::move(samples)};
    }

    const auto mode = classifier.head().mode;
    std::vector<std::size_t> block_sizes;
    for (const auto& block : classifier.parameter_blocks()) block_sizes.push_back(block.size());
    Optimizer optimizer(config.optimizer, config.learning_rate, block_sizes);
    const bool parallel_loading = !config.deterministic;
    const bool select_on_val = !splits.val.empty();

    std::optional<model::Classifier> best;
    double best_score = -std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    std::vector<std::size_t> order;
    std::vector<double> batch_losses;
    model::Classifier::Cache cache;
    std::vector<std::vector<double>> grads;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        order = samples;
        Rng rng(mix_seed(config.seed, epoch));
        rng.shuffle(std::span<std::size_t>(order));

        double loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
            const auto chunk =
                std::span<const std::size_t>(order).subspan(start, std::min(config.batch_size, order.size() - start));
            if (observer) observer(epoch, chunk);
            const auto batch = images.batch(chunk, parallel_loading);
            const auto targets = model::targets_from_labels(labels, chunk);
            const auto& logits = classifier.forward_train(batch, cache);
            const auto loss = model::loss_from_logits(logits, targets, mode);
            check_finite(loss.value, epoch, batch_index, batch_losses);
            batch_losses.push_back(loss.value);
            loss_sum += loss.value * static_cast<double>(chunk.size());
            classifier.backward(cache, loss.grad_logits, grads, config.freeze);
            optimizer.step(classifier.parameter_blocks(), grads);
        }

        EpochRecord record;
        record.epoch = epoch;
        record.samples = order.size();
        record.train_loss = loss_sum / static_cast<double>(order.size());
        if (select_on_val) {
            const auto val = evaluate_rows(classifier, images, labels, splits.val, config.batch_size, parallel_loading);
            record.val_loss = val.loss;
            record.val_f1 = val.report.macro.f1;
        } else {
            record.val_loss = record.val_f1 = std::numeric_limits<double>::quiet_NaN();
        }
        record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        history.epochs.push_back(record);

        if (!select_on_val) {
            history.best_epoch = epoch;
            continue;
        }
        const double score = config.early_stop == EarlyStopMetric::val_f1 ? record.val_f1 : -record.val_loss;
        if (!best || score > best_score) {
            best = classifier;
            best_score = score;
            history.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= config.patience && config.patience > 0) {
            history.stopped_early = epoch < config.epochs;
            break;
        }
    }

    return {best ? std::move(*best) : std::move(classifier), std::move(history), std::move(plan), std::move(samples)};
}

}  // namespace vsa::train
