#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vsa/core/label_matrix.hpp"

namespace vsa::eval {

/// One-vs-rest (single-label) or per-label (multi-label) binary counts.
struct PerClassMetrics {
    std::string class_name;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    std::size_t support() const { return tp + fn; }
};

/// Fills the four rates from the counts; zero denominators give 0.
PerClassMetrics from_counts(std::string class_name, std::size_t tp, std::size_t fp, std::size_t fn,
                            std::size_t tn);

struct Aggregate {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

enum class TaskMode { single_label, multi_label };

struct MetricsReport {
    TaskMode mode = TaskMode::single_label;
    std::vector<PerClassMetrics> per_class;
    Aggregate macro;
    Aggregate weighted;
    /// Exact-match accuracy (single-label) or subset accuracy (multi-label).
    double exact_match = 0.0;
    std::size_t samples = 0;
};

/// Single-label: predictions and truths are class indices.
/// Throws Error(shape_mismatch) on length mismatch, Error(out_of_range) for a
/// class index >= class_names.size().
std::vector<PerClassMetrics> per_class_metrics(std::span<const std::size_t> predictions,
                                               std::span<const std::size_t> truths,
                                               std::span<const std::string> class_names);

/// Multi-label: row-major binary matrices of equal shape.
std::vector<PerClassMetrics> per_class_metrics(const LabelMatrix& predictions, const LabelMatrix& truths);

/// Macro (unweighted mean) and support-weighted means. Throws
/// Error(invalid_argument) for an empty list. Weighted falls back to macro
/// when all supports are zero.
std::pair<Aggregate, Aggregate> aggregate(std::span<const PerClassMetrics> per_class,
                                          std::span<const std::size_t> supports);

MetricsReport evaluate_single_label(std::span<const std::size_t> predictions,
                                    std::span<const std::size_t> truths,
                                    std::span<const std::string> class_names);
MetricsReport evaluate_multi_label(const LabelMatrix& predictions, const LabelMatrix& truths);

/// `metrics.json`. The run metadata (name, task) is carried alongside.
struct RunMetrics {
    std::string name;
    std::string task;  // "TASK1".."TASK3"
    MetricsReport report;
};

void write_metrics_json(const std::filesystem::path& path, const RunMetrics& run);
RunMetrics read_metrics_json(const std::filesystem::path& path);

}  // namespace vsa::eval
