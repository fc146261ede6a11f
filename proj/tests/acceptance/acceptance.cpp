// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "support.hpp"
#include "vsa/core/error.hpp"
#include "vsa/crowd/aggregate.hpp"
#include "vsa/crowd/stats.hpp"
#include "vsa/eval/metrics.hpp"
#include "vsa/eval/report.hpp"
#include "vsa/model/loss.hpp"
#include "vsa/resample/oversample.hpp"
#include "vsa/service/server.hpp"
#include "vsa/train/trainer.hpp"

using namespace vsa;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

Outcome aggregation_oracle() {
    const auto responses = testing::random_responses(2024, 1000, 5);
    const auto start = std::chrono::steady_clock::now();
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
        const std::span<const crowd::CrowdResponse> group(responses.data() + 5 * i, 5);
        std::vector<int> q1, q2;
        std::vector<std::vector<std::size_t>> q3, q4;
        for (const auto& r : group) {
            q1.push_back(r.q1);
            q2.push_back(r.q2);
            q3.push_back(r.q3_tags);
            q4.push_back(r.q4_tags);
        }
        const auto set1 = crowd::aggregate_scale(q1, corpus::LabelSetId::set1);
        const auto set2 = crowd::aggregate_scale(q2, corpus::LabelSetId::set2);
        mismatches += corpus::tag_names(corpus::LabelSetId::set1)[set1] != testing::oracle_scale(q1, true);
        mismatches += corpus::tag_names(corpus::LabelSetId::set2)[set2] != testing::oracle_scale(q2, false);
        mismatches += crowd::aggregate_tagset(group, corpus::LabelSetId::set3) != testing::oracle_tagset(q3, 7);
        mismatches += crowd::aggregate_tagset(group, corpus::LabelSetId::set4) != testing::oracle_tagset(q4, 10);
    }
    const double elapsed = seconds_since(start);
    return {mismatches == 0 && elapsed < 10.0,
            fmt("%zu mismatches over 1000 images x 5 responses, %.2f s (limit 10 s)", mismatches, elapsed)};
}

Outcome cooccurrence_oracle() {
    std::mt19937_64 gen(7);
    std::vector<std::vector<std::size_t>> sets;
    for (int i = 0; i < 10000; ++i) sets.push_back(testing::random_subset(gen, 10, 0.3));
    std::size_t mismatches = 0, bound_violations = 0;
    std::vector<std::size_t> single(10, 0);
    for (const auto& s : sets) {
        for (auto t : s) ++single[t];
    }
    for (std::size_t arity : {2u, 3u}) {
        const auto got = crowd::cooccurrence(sets, arity);
        const auto want = testing::oracle_cooccurrence(sets, 10, arity);
        std::map<std::vector<std::size_t>, std::size_t> got_map;
        for (const auto& c : got) got_map[c.tags] = c.count;
        mismatches += got_map != want;
        mismatches += got.size() != want.size();
        if (arity == 2) {
            for (const auto& [tags, count] : got_map) bound_violations += count > std::min(single[tags[0]], single[tags[1]]);
        }
    }
    return {mismatches == 0 && bound_violations == 0,
            fmt("10000 tag sets: %zu count mismatches, %zu pairs above min(individual)", mismatches,
                bound_violations)};
}

Outcome single_label_oversampler() {
    std::vector<std::size_t> labels;
    const std::size_t counts[] = {803, 2297, 579};
    for (std::size_t c = 0; c < 3; ++c) labels.insert(labels.end(), counts[c], c);
    std::mt19937_64 gen(1);
    std::shuffle(labels.begin(), labels.end(), gen);
    const std::vector<std::string> names{"positive", "negative", "neutral"};
    const auto a = resample::oversample_single_label(labels, names, 1.0, 42);
    const auto b = resample::oversample_single_label(labels, names, 1.0, 42);
    std::vector<std::size_t> drawn(3, 0);
    for (auto i : a.index_multiset) ++drawn[labels[i]];
    const std::vector<std::size_t> expected{2297, 2297, 2297};
    const bool identical = resample::plan_to_json(a) == resample::plan_to_json(b);
    return {a.after == expected && drawn == expected && identical,
            fmt("after (%zu, %zu, %zu), counted (%zu, %zu, %zu), repeat run %s", a.after[0], a.after[1], a.after[2],
                drawn[0], drawn[1], drawn[2], identical ? "byte-identical" : "differs")};
}

Outcome multi_label_oversampler() {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> density(0.1, 0.5);
    std::size_t target_misses = 0, lost_originals = 0, over_cap = 0, group_mismatches = 0, aborts = 0;
    const double rho = resample::kDefaultMultiLabelRho;
    for (int m = 0; m < 200; ++m) {
        auto matrix = testing::random_matrix(gen, 50, 7, density(gen));
        for (std::size_t c = 0; c < 7; ++c) {
            if (matrix.column(c) == std::vector<std::uint8_t>(50, 0)) matrix.set(gen() % 50, c, true);
        }
        std::vector<std::size_t> support(7, 0);
        for (std::size_t r = 0; r < 50; ++r) {
            for (std::size_t c = 0; c < 7; ++c) support[c] += matrix.at(r, c);
        }
        const auto majority =
            static_cast<std::size_t>(std::max_element(support.begin(), support.end()) - support.begin());
        std::vector<std::size_t> positive, negative;
        for (std::size_t c = 0; c < 7; ++c) {
            if (c == majority) continue;
            double phi = testing::oracle_phi(matrix.column(majority), matrix.column(c));
            if (std::abs(phi) < 1e-12) phi = 0.0;
            (phi >= 0 ? positive : negative).push_back(c);
        }
        const auto groups = resample::correlation_groups(matrix);
        group_mismatches += groups.majority != majority || groups.positive != positive || groups.negative != negative;

        resample::ResamplePlan plan;
        try {
            plan = resample::oversample_multilabel(matrix, rho, static_cast<std::uint64_t>(m), 4.0);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::growth_cap_exceeded) {
                ++aborts;
                continue;
            }
            throw;
        }
        const auto target = static_cast<std::size_t>(std::ceil(rho * static_cast<double>(support[majority]) - 1e-9));
        std::vector<std::size_t> after(7, 0);
        for (auto i : plan.index_multiset) {
            for (std::size_t c = 0; c < 7; ++c) after[c] += matrix.at(i, c);
        }
        for (auto a : after) target_misses += a < target;
        std::vector<std::size_t> seen(50, 0);
        for (auto i : plan.index_multiset) ++seen[i];
        for (std::size_t i = 0; i < 50; ++i) lost_originals += seen[i] == 0 || plan.index_multiset[i] != i;
        over_cap += plan.index_multiset.size() > 200;
    }
    return {target_misses == 0 && lost_originals == 0 && over_cap == 0 && group_mismatches == 0,
            fmt("200 matrices 50x7, rho %.1f: %zu below target, %zu originals lost, %zu over 4x cap, %zu clean "
                "aborts, %zu grouping mismatches",
                rho, target_misses, lost_originals, over_cap, aborts, group_mismatches)};
}

Outcome loss_gradients() {
    double worst = 0;
    for (auto mode : {model::HeadMode::single_label, model::HeadMode::multi_label}) {
        const std::size_t classes = mode == model::HeadMode::single_label ? 3 : 7;
        const auto c = testing::tiny_classifier(6, 5, mode, classes, 11);
        const auto batch = testing::random_tensor({4, 3, 6, 6}, 12);
        const auto targets = testing::random_targets(4, classes, mode, 13);
        worst = std::max(worst, testing::gradient_check(c, batch, targets).max_relative_error);
    }
    const model::Tensor zeros({5, 3}, 0.0);
    const auto t1 = testing::random_targets(5, 3, model::HeadMode::single_label, 1);
    const auto t2 = testing::random_targets(5, 3, model::HeadMode::multi_label, 2);
    const double ce = model::softmax_cross_entropy(zeros, t1).value;
    const double bce = model::sigmoid_binary_cross_entropy(zeros, t2).value;
    const double ce_scores = model::loss(model::Tensor({5, 3}, 1.0 / 3.0), t1, model::HeadMode::single_label);
    const double bce_scores = model::loss(model::Tensor({5, 3}, 0.5), t2, model::HeadMode::multi_label);
    const double dev = std::max({std::abs(ce - std::log(3.0)), std::abs(bce - std::log(2.0)),
                                 std::abs(ce_scores - std::log(3.0)), std::abs(bce_scores - std::log(2.0))});
    return {worst < 1e-4 && dev < 1e-6,
            fmt("max gradient relative error %.2e (limit 1e-4); uniform-loss deviation %.1e (limit 1e-6)", worst, dev)};
}

Outcome head_fusion_shapes() {
    const auto single = testing::tiny_classifier(8, 6, model::HeadMode::single_label, 3, 1);
    const auto multi = testing::tiny_classifier(8, 6, model::HeadMode::multi_label, 10, 2);
    double worst_sum = 0;
    std::size_t out_of_range = 0;
    for (int b = 0; b < 100; ++b) {
        const auto batch = testing::random_tensor({1 + static_cast<std::size_t>(b % 7), 3, 8, 8}, 100 + b, 3.0);
        const auto s = single.forward(batch);
        for (std::size_t r = 0; r < s.batch(); ++r) {
            double sum = 0;
            for (std::size_t c = 0; c < 3; ++c) sum += s.at(r, c);
            worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        }
        for (double v : multi.forward(batch).data) out_of_range += !(v > 0.0 && v < 1.0);
    }
    std::size_t width_errors = 0;
    const std::pair<std::size_t, std::size_t> dims[] = {{4, 4}, {6, 3}, {2, 9}};
    for (const auto& [d1, d2] : dims) {
        Rng rng(d1 * 10 + d2);
        model::Classifier fused({testing::tiny_backbone(8, d1, 1),
                                 testing::tiny_backbone(8, d2, 2, model::Architecture::vggnet,
                                                        model::Pretraining::scene_centric)},
                                {model::HeadMode::single_label, 3, 0.5}, rng);
        width_errors += fused.head_input_width() != d1 + d2;
        width_errors += fused.features(testing::random_tensor({2, 3, 8, 8}, 3)).shape != model::Shape{2, d1 + d2};
    }
    return {worst_sum < 1e-5 && out_of_range == 0 && width_errors == 0,
            fmt("100 batches: max |row sum - 1| %.1e, %zu sigmoid outputs outside (0,1), %zu fusion width errors",
                worst_sum, out_of_range, width_errors)};
}

Outcome trainer_sanity() {
    const auto start = std::chrono::steady_clock::now();
    auto toy = testing::toy_task1(32, 16, 5);
    corpus::SplitAssignment splits;
    splits.train.resize(32);
    std::iota(splits.train.begin(), splits.train.end(), 0);
    const auto initial = testing::tiny_classifier(16, 8, model::HeadMode::single_label, 3, 6);
    train::TrainConfig config;
    config.task = train::Task::task1;
    config.epochs = 50;
    config.batch_size = 8;
    config.learning_rate = 5e-3;
    config.seed = 1;
    const auto trained = train::finetune(initial, toy.images, toy.labels, splits, config);
    const auto fit = train::evaluate_rows(trained.classifier, toy.images, toy.labels, splits.train);

    auto zero = config;
    zero.epochs = 0;
    const bool identity = train::finetune(initial, toy.images, toy.labels, splits, zero).classifier == initial;

    auto short_run = config;
    short_run.epochs = 5;
    const auto a = train::finetune(initial, toy.images, toy.labels, splits, short_run);
    const auto b = train::finetune(initial, toy.images, toy.labels, splits, short_run);
    bool same_curve = a.history.epochs.size() == b.history.epochs.size();
    for (std::size_t e = 0; same_curve && e < a.history.epochs.size(); ++e) {
        same_curve = a.history.epochs[e].train_loss == b.history.epochs[e].train_loss;
    }
    const double elapsed = seconds_since(start);
    return {fit.report.exact_match >= 0.95 && identity && same_curve && elapsed < 900.0,
            fmt("train exact match %.1f%% after %zu epochs (need 95%%), epochs=0 identity %s, repeat curves %s, "
                "%.1f s (limit 900 s)",
                100.0 * fit.report.exact_match, trained.history.epochs.size(), identity ? "yes" : "no",
                same_curve ? "identical" : "differ", elapsed)};
}

bool same_counts(const eval::PerClassMetrics& m, const testing::Counts& c) {
    const double p = testing::safe_div(c.tp, c.tp + c.fp);
    const double r = testing::safe_div(c.tp, c.tp + c.fn);
    const double f = testing::safe_div(2 * p * r, p + r);
    const double a = testing::safe_div(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn);
    return m.tp == c.tp && m.fp == c.fp && m.fn == c.fn && m.tn == c.tn && std::abs(m.precision - p) < 1e-12 &&
           std::abs(m.recall - r) < 1e-12 && std::abs(m.f1 - f) < 1e-12 && std::abs(m.accuracy - a) < 1e-12;
}

Outcome metrics_oracle() {
    std::mt19937_64 gen(31);
    std::size_t mismatches = 0;
    for (int k = 0; k < 1000; ++k) {
        const std::size_t classes = 2 + gen() % 9;
        const std::size_t n = 1 + gen() % 120;
        std::vector<std::string> names;
        for (std::size_t c = 0; c < classes; ++c) names.push_back("c" + std::to_string(c));
        if (k % 2 == 0) {
            std::vector<std::size_t> pred(n), truth(n);
            for (std::size_t i = 0; i < n; ++i) {
                pred[i] = gen() % classes;
                truth[i] = gen() % classes;
            }
            const auto got = eval::per_class_metrics(pred, truth, names);
            const auto want = testing::oracle_confusion_counts(pred, truth, classes);
            for (std::size_t c = 0; c < classes; ++c) mismatches += !same_counts(got[c], want[c]);
        } else {
            const auto pred = testing::random_matrix(gen, n, classes, 0.4);
            const auto truth = testing::random_matrix(gen, n, classes, 0.4);
            const auto got = eval::per_class_metrics(pred, truth);
            for (std::size_t c = 0; c < classes; ++c) {
                // Each label is its own 2x2 confusion matrix.
                std::vector<std::size_t> p(n), t(n);
                for (std::size_t i = 0; i < n; ++i) {
                    p[i] = pred.at(i, c);
                    t[i] = truth.at(i, c);
                }
                mismatches += !same_counts(got[c], testing::oracle_confusion_counts(p, t, 2)[1]);
            }
        }
    }
    const auto worked = eval::from_counts("x", 2, 1, 1, 6);
    const bool worked_ok = std::abs(worked.precision - 2.0 / 3) < 1e-12 && std::abs(worked.recall - 2.0 / 3) < 1e-12 &&
                           std::abs(worked.f1 - 2.0 / 3) < 1e-12 && std::abs(worked.accuracy - 0.8) < 1e-12;
    const auto zero = eval::from_counts("z", 0, 0, 5, 0);
    const bool zero_ok = zero.precision == 0.0 && zero.recall == 0.0 && zero.f1 == 0.0;
    return {mismatches == 0 && worked_ok && zero_ok,
            fmt("1000 instances: %zu per-class mismatches; worked example %s; zero denominators %s", mismatches,
                worked_ok ? "ok" : "wrong", zero_ok ? "give 0" : "wrong")};
}

eval::RunMetrics injected(const std::string& name, double a, double p, double r, double f) {
    eval::RunMetrics run;
    run.name = name;
    run.task = "TASK1";
    run.report.per_class = {eval::from_counts("positive", 1, 0, 0, 1)};
    run.report.macro = {a / 100.0, p / 100.0, r / 100.0, f / 100.0};
    run.report.weighted = run.report.macro;
    return run;
}

Outcome report_fidelity() {
    // Reference rows, as published, for the first two models of the TASK1 table.
    const std::string expected = "VGGNet (ImageNet) & 92.12 & 88.64 & 87.63 & 87.89 \\\\ \\hline\n"
                                 "VGGNet (Places)   & 92.88 & 89.92 & 88.43 & 89.07 \\\\ \\hline\n";
    const std::vector<eval::RunMetrics> runs{injected("VGGNet (ImageNet)", 92.12, 88.64, 87.63, 87.89),
                                             injected("VGGNet (Places)", 92.88, 89.92, 88.43, 89.07)};
    const auto tables = eval::report_table(runs);
    const bool latex_ok = tables.latex == expected;
    const bool text_ok = tables.text.find("VGGNet (Places)   |    92.88 |     89.92 |  88.43 |   89.07") !=
                         std::string::npos;
    return {latex_ok && text_ok, fmt("LaTeX rows %s; text table row %s", latex_ok ? "byte-identical" : "differ",
                                     text_ok ? "carries 92.88/89.92/88.43/89.07" : "differs")};
}

Outcome service_concurrency() {
    const auto dir = testing::temp_dir("acceptance_service");
    std::vector<corpus::ImageRecord> records;
    for (int i = 0; i < 40; ++i) records.push_back({"img" + std::to_string(i), "img" + std::to_string(i) + ".jpg", "k", "l", true});
    service::ServerConfig config;
    config.port = 0;
    config.store_path = dir / "responses.csv";
    config.assignment.target_responses = 5;
    service::AnnotationServer server(corpus::Manifest(records, dir), config);
    const int port = server.bind();
    std::thread serving([&] { server.serve(); });
    server.wait_until_ready();

    std::atomic<std::size_t> accepted{0}, http_errors{0}, rejected{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < 50; ++w) {
        workers.emplace_back([&, w] {
            httplib::Client client("127.0.0.1", port);
            const std::string id = "worker" + std::to_string(w);
            while (true) {
                auto res = client.Get("/api/assignment?worker=" + id);
                if (!res || res->status != 200) {
                    ++http_errors;
                    return;
                }
                const auto a = json::parse(res->body);
                if (a.contains("done")) return;
                const json body{{"assignment_token", a["assignment_token"]},
                                {"q1", 1 + w % 10},
                                {"q2", 5},
                                {"q3_tags", {"fear"}},
                                {"q4_tags", {"anxiety", "horror"}},
                                {"q5_features", {"scene_background"}}};
                auto sub = client.Post("/api/response", body.dump(), "application/json");
                if (!sub) {
                    ++http_errors;
                    return;
                }
                if (sub->status == 200) {
                    ++accepted;
                } else {
                    ++rejected;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    const bool still_done = !server.state().next_assignment("late-worker");
    server.stop();
    serving.join();

    const auto stored = service::ResponseStore(config.store_path).snapshot();
    std::set<std::pair<std::string, std::string>> pairs;
    std::map<std::string, std::size_t> per_image;
    for (const auto& r : stored) {
        pairs.emplace(r.worker_id, r.image_id);
        ++per_image[r.image_id];
    }
    const std::size_t duplicates = stored.size() - pairs.size();
    std::size_t count_mismatch = 0, off_target = 0;
    for (const auto& rec : records) {
        const auto progress = server.state().progress(rec.image_id);
        count_mismatch += progress.completed != per_image[rec.image_id];
        off_target += progress.completed != 5;
    }
    const bool pass = http_errors == 0 && rejected == 0 && duplicates == 0 && count_mismatch == 0 && off_target == 0 &&
                      still_done && accepted == stored.size();
    return {pass, fmt("50 workers, 40 images: %zu accepted, %zu stored, %zu duplicate pairs, %zu count mismatches, "
                      "%zu images off target 5, %zu http errors, assignment stopped %s",
                      accepted.load(), stored.size(), duplicates, count_mismatch, off_target, http_errors.load(),
                      still_done ? "yes" : "no")};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> checks[] = {
        {"aggregation_oracle", aggregation_oracle},
        {"cooccurrence_oracle", cooccurrence_oracle},
        {"single_label_oversampler", single_label_oversampler},
        {"multi_label_oversampler", multi_label_oversampler},
        {"loss_gradient_checks", loss_gradients},
        {"head_fusion_shapes", head_fusion_shapes},
        {"trainer_sanity", trainer_sanity},
        {"metrics_oracle", metrics_oracle},
        {"report_fidelity", report_fidelity},
        {"service_concurrency", service_concurrency},
    };
    int failures = 0;
    for (const auto& [name, check] : checks) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
