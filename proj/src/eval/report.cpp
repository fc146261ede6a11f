#include "vsa/eval/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "vsa/core/csv.hpp"
#include "vsa/core/error.hpp"

namespace vsa::eval {

std::string format_percent(double fraction) {
    // Work in hundredths of a percent; the epsilon absorbs binary noise such
    // as 0.12345 * 10000 = 1234.4999999999998.
    const double scaled = std::floor(fraction * 10000.0 + 0.5 + 1e-7);
    const auto hundredths = static_cast<long long>(scaled);
    const bool negative = hundredths < 0;
    const auto magnitude = negative ? -hundredths : hundredths;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", negative ? "-" : "", magnitude / 100, magnitude % 100);
    return buf;
}

namespace {

using Grid = std::vector<std::vector<std::string>>;

// Left-aligns the first `text_columns` columns, right-aligns the rest.
std::string render_aligned(const Grid& grid, std::size_t text_columns) {
    if (grid.empty()) return {};
    std::vector<std::size_t> width(grid.front().size(), 0);
    for (const auto& row : grid) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& row) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) line += " | ";
            const auto pad = std::string(width[c] - row[c].size(), ' ');
            line += c < text_columns ? row[c] + pad : pad + row[c];
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << '\n';
    };
    emit(grid.front());
    std::string rule;
    for (std::size_t c = 0; c < width.size(); ++c) {
        if (c) rule += "-+-";
        rule += std::string(width[c], '-');
    }
    out << rule << '\n';
    for (std::size_t r = 1; r < grid.size(); ++r) emit(grid[r]);
    return out.str();
}

std::string render_csv(const Grid& grid) {
    std::string out;
    for (const auto& row : grid) out += csv::join_row(row) + '\n';
    return out;
}

}  // namespace

ReportTables report_table(std::span<const RunMetrics> runs, AggregateKind kind) {
    for (const auto& run : runs) {
        if (run.task != runs.front().task) {
            throw Error(ErrorKind::task_mismatch, "run '" + run.name + "' is for " + run.task + ", expected " +
                                                      runs.front().task);
        }
        const auto& a = run.report.per_class;
        const auto& b = runs.front().report.per_class;
        if (a.size() != b.size() ||
            !std::equal(a.begin(), a.end(), b.begin(),
                        [](const auto& x, const auto& y) { return x.class_name == y.class_name; })) {
            throw Error(ErrorKind::task_mismatch, "run '" + run.name + "' has a different class list");
        }
    }

    Grid summary{{"Model", "Accuracy", "Precision", "Recall", "F-Score"}};
    ReportTables tables;
    std::size_t name_width = 0;
    for (const auto& run : runs) name_width = std::max(name_width, run.name.size());
    for (const auto& run : runs) {
        const auto& agg = kind == AggregateKind::macro ? run.report.macro : run.report.weighted;
        std::vector<std::string> row{run.name, format_percent(agg.accuracy), format_percent(agg.precision),
                                     format_percent(agg.recall), format_percent(agg.f1)};
        // Names are padded so the first column lines up in the .tex source.
        tables.latex += row[0] + std::string(name_width - row[0].size(), ' ') + " & " + row[1] + " & " + row[2] +
                        " & " + row[3] + " & " + row[4] + " \\\\ \\hline\n";
        summary.push_back(std::move(row));
    }
    tables.csv = render_csv(summary);
    tables.text = render_aligned(summary, 1);

    Grid per_class{{"Model", "Metric"}};
    if (!runs.empty()) {
        for (const auto& m : runs.front().report.per_class) per_class.front().push_back(m.class_name);
    }
    static const char* kMetricNames[] = {"Accuracy", "Precision", "Recall", "F1-Score"};
    for (const auto& run : runs) {
        for (int metric = 0; metric < 4; ++metric) {
            std::vector<std::string> row{metric == 0 ? run.name : "", kMetricNames[metric]};
            for (const auto& m : run.report.per_class) {
                const double values[] = {m.accuracy, m.precision, m.recall, m.f1};
                row.push_back(format_percent(values[metric]));
            }
            per_class.push_back(std::move(row));
        }
    }
    tables.per_class_text = render_aligned(per_class, 2);
    // CSV repeats the model name on every row so each line stands alone.
    for (std::size_t r = 1; r < per_class.size(); ++r) {
        if (per_class[r][0].empty()) per_class[r][0] = per_class[r - 1][0];
    }
    tables.per_class_csv = render_csv(per_class);
    return tables;
}

void write_report(const std::filesystem::path& out_dir, const std::string& task, const ReportTables& tables) {
    std::filesystem::create_directories(out_dir);
    std::string stem = "table_" + task;
    std::transform(stem.begin(), stem.end(), stem.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const std::pair<std::string, const std::string*> files[] = {
        {stem + ".csv", &tables.csv},
        {stem + ".txt", &tables.text},
        {stem + ".tex", &tables.latex},
        {stem + "_per_class.csv", &tables.per_class_csv},
        {stem + "_per_class.txt", &tables.per_class_text},
    };
    for (const auto& [name, content] : files) {
        std::ofstream out(out_dir / name, std::ios::binary);
        if (!out) throw Error(ErrorKind::not_found, "cannot write '" + (out_dir / name).string() + "'");
        out << *content;
    }
}

}  // namespace vsa::eval
