#include "vsa/eval/metrics.hpp"

#include <fstream>

#include <json.hpp>

#include "vsa/core/error.hpp"

namespace vsa::eval {
namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

PerClassMetrics from_counts(std::string class_name, std::size_t tp, std::size_t fp, std::size_t fn,
                            std::size_t tn) {
    PerClassMetrics m{std::move(class_name), tp, fp, fn, tn};
    m.accuracy = ratio(tp + tn, tp + fp + fn + tn);
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.f1 = (m.precision + m.recall) == 0.0 ? 0.0
                                            : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

std::vector<PerClassMetrics> per_class_metrics(std::span<const std::size_t> predictions,
                                               std::span<const std::size_t> truths,
                                               std::span<const std::string> class_names) {
    if (predictions.size() != truths.size()) {
        throw Error(ErrorKind::shape_mismatch, "predictions and truths differ in length");
    }
    const auto classes = class_names.size();
    std::vector<std::size_t> tp(classes, 0), fp(classes, 0), fn(classes, 0);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto p = predictions[i];
        const auto t = truths[i];
        if (p >= classes || t >= classes) {
            throw Error(ErrorKind::out_of_range, "class index outside the task's class set");
        }
        if (p == t) {
            ++tp[t];
        } else {
            ++fp[p];
            ++fn[t];
        }
    }
    std::vector<PerClassMetrics> out;
    const auto n = predictions.size();
    for (std::size_t c = 0; c < classes; ++c) {
        out.push_back(from_counts(class_names[c], tp[c], fp[c], fn[c], n - tp[c] - fp[c] - fn[c]));
    }
    return out;
}

std::vector<PerClassMetrics> per_class_metrics(const LabelMatrix& predictions, const LabelMatrix& truths) {
    if (predictions.rows() != truths.rows() || predictions.cols() != truths.cols()) {
        throw Error(ErrorKind::shape_mismatch, "prediction and truth matrices differ in shape");
    }
    std::vector<PerClassMetrics> out;
    for (std::size_t c = 0; c < truths.cols(); ++c) {
        std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (std::size_t r = 0; r < truths.rows(); ++r) {
            const bool p = predictions.at(r, c);
            const bool t = truths.at(r, c);
            if (p && t) ++tp;
            else if (p) ++fp;
            else if (t) ++fn;
            else ++tn;
        }
        out.push_back(from_counts(truths.class_names()[c], tp, fp, fn, tn));
    }
    return out;
}

std::pair<Aggregate, Aggregate> aggregate(std::span<const PerClassMetrics> per_class,
                                          std::span<const std::size_t> supports) {
    if (per_class.empty()) throw Error(ErrorKind::invalid_argument, "cannot aggregate an empty class list");
    if (supports.size() != per_class.size()) {
        throw Error(ErrorKind::shape_mismatch, "supports and per-class metrics differ in length");
    }
    Aggregate macro, weighted;
    double total = 0.0;
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        const auto& m = per_class[c];
        macro.accuracy += m.accuracy;
        macro.precision += m.precision;
        macro.recall += m.recall;
        macro.f1 += m.f1;
        const auto w = static_cast<double>(supports[c]);
        weighted.accuracy += w * m.accuracy;
        weighted.precision += w * m.precision;
        weighted.recall += w * m.recall;
        weighted.f1 += w * m.f1;
        total += w;
    }
    const auto k = static_cast<double>(per_class.size());
    macro = {macro.accuracy / k, macro.precision / k, macro.recall / k, macro.f1 / k};
    if (total == 0.0) {
        weighted = macro;
    } else {
        weighted = {weighted.accuracy / total, weighted.precision / total, weighted.recall / total,
                    weighted.f1 / total};
    }
    return {macro, weighted};
}

namespace {

void fill_aggregates(MetricsReport& report) {
    std::vector<std::size_t> supports;
    for (const auto& m : report.per_class) supports.push_back(m.support());
    std::tie(report.macro, report.weighted) = aggregate(report.per_class, supports);
}

}  // namespace

MetricsReport evaluate_single_label(std::span<const std::size_t> predictions,
                                    std::span<const std::size_t> truths,
                                    std::span<const std::string> class_names) {
    MetricsReport report;
    report.mode = TaskMode::single_label;
    report.per_class = per_class_metrics(predictions, truths, class_names);
    report.samples = truths.size();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) hits += predictions[i] == truths[i];
    report.exact_match = ratio(hits, truths.size());
    fill_aggregates(report);
    return report;
}

MetricsReport evaluate_multi_label(const LabelMatrix& predictions, const LabelMatrix& truths) {
    MetricsReport report;
    report.mode = TaskMode::multi_label;
    report.per_class = per_class_metrics(predictions, truths);
    report.samples = truths.rows();
    std::size_t hits = 0;
    for (std::size_t r = 0; r < truths.rows(); ++r) {
        const auto p = predictions.row(r);
        const auto t = truths.row(r);
        hits += std::equal(p.begin(), p.end(), t.begin());
    }
    report.exact_match = ratio(hits, truths.rows());
    fill_aggregates(report);
    return report;
}

namespace {

nlohmann::ordered_json aggregate_json(const Aggregate& a) {
    return {{"accuracy", a.accuracy}, {"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
}

Aggregate aggregate_from(const nlohmann::json& j) {
    return {j.at("accuracy").get<double>(), j.at("precision").get<double>(), j.at("recall").get<double>(),
            j.at("f1").get<double>()};
}

}  // namespace

void write_metrics_json(const std::filesystem::path& path, const RunMetrics& run) {
    nlohmann::ordered_json doc;
    doc["name"] = run.name;
    doc["task"] = run.task;
    doc["mode"] = run.report.mode == TaskMode::single_label ? "single_label" : "multi_label";
    doc["samples"] = run.report.samples;
    doc[run.report.mode == TaskMode::single_label ? "exact_match_accuracy" : "subset_accuracy"] =
        run.report.exact_match;
    doc["macro"] = aggregate_json(run.report.macro);
    doc["weighted"] = aggregate_json(run.report.weighted);
    auto classes = nlohmann::ordered_json::array();
    for (const auto& m : run.report.per_class) {
        classes.push_back({{"class", m.class_name},
                           {"tp", m.tp},
                           {"fp", m.fp},
                           {"fn", m.fn},
                           {"tn", m.tn},
                           {"accuracy", m.accuracy},
                           {"precision", m.precision},
                           {"recall", m.recall},
                           {"f1", m.f1}});
    }
    doc["per_class"] = classes;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::not_found, "cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

RunMetrics read_metrics_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::not_found, "metrics file '" + path.string() + "' not found");
    try {
        const auto doc = nlohmann::json::parse(in);
        RunMetrics run;
        run.name = doc.at("name").get<std::string>();
        run.task = doc.at("task").get<std::string>();
        auto& r = run.report;
        r.mode = doc.at("mode").get<std::string>() == "single_label" ? TaskMode::single_label
                                                                       : TaskMode::multi_label;
        r.samples = doc.at("samples").get<std::size_t>();
        r.exact_match = doc.at(r.mode == TaskMode::single_label ? "exact_match_accuracy" : "subset_accuracy")
                            .get<double>();
        r.macro = aggregate_from(doc.at("macro"));
        r.weighted = aggregate_from(doc.at("weighted"));
        for (const auto& m : doc.at("per_class")) {
            PerClassMetrics pc;
            pc.class_name = m.at("class").get<std::string>();
            pc.tp = m.at("tp").get<std::size_t>();
            pc.fp = m.at("fp").get<std::size_t>();
            pc.fn = m.at("fn").get<std::size_t>();
            pc.tn = m.at("tn").get<std::size_t>();
            pc.accuracy = m.at("accuracy").get<double>();
            pc.precision = m.at("precision").get<double>();
            pc.recall = m.at("recall").get<double>();
            pc.f1 = m.at("f1").get<double>();
            r.per_class.push_back(std::move(pc));
        }
        return run;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, "'" + path.string() + "': " + e.what());
    }
}

}  // namespace vsa::eval
