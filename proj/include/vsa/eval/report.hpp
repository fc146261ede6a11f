#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "vsa/eval/metrics.hpp"

namespace vsa::eval {

/// Fraction in [0,1] rendered as a percentage with two decimals, rounding
/// half up: 0.12345 -> "12.35".
std::string format_percent(double fraction);

enum class AggregateKind { macro, weighted };

struct ReportTables {
    std::string csv;             // Model,Accuracy,Precision,Recall,F-Score
    std::string text;            // aligned columns
    std::string latex;           // one `name & a & p & r & f \\ \hline` row per model, names padded
    std::string per_class_csv;   // Model,Metric,<class>...
    std::string per_class_text;  // model x metric rows, one column per class
};

/// Summary and per-class tables for runs evaluated on the same task.
/// Throws Error(task_mismatch) when runs disagree on the task or class list.
ReportTables report_table(std::span<const RunMetrics> runs, AggregateKind kind = AggregateKind::macro);

/// Writes table_<task>.csv/.txt/.tex and the per-class companions
/// (table_<task>_per_class.csv/.txt) into `out_dir`. `task` is e.g. "TASK1";
/// file names use its lower-case form.
void write_report(const std::filesystem::path& out_dir, const std::string& task,
                  const ReportTables& tables);

}  // namespace vsa::eval
