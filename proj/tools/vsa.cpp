// vsa: command-line front end for the visual sentiment pipeline.

#include <algorithm>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vsa/core/error.hpp"
#include "vsa/corpus/label_sets.hpp"
#include "vsa/corpus/manifest.hpp"
#include "vsa/corpus/splits.hpp"
#include "vsa/crowd/aggregate.hpp"
#include "vsa/crowd/label_io.hpp"
#include "vsa/crowd/response.hpp"
#include "vsa/crowd/stats.hpp"
#include "vsa/eval/metrics.hpp"
#include "vsa/eval/report.hpp"
#include "vsa/model/classifier.hpp"
#include "vsa/model/serialization.hpp"
#include "vsa/resample/oversample.hpp"
#include "vsa/service/server.hpp"
#include "vsa/train/config.hpp"
#include "vsa/train/data_source.hpp"
#include "vsa/train/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct IngestOptions {
    fs::path images;
    fs::path out = "manifest.csv";
    std::string license = "unknown";
    fs::path splits;
    std::uint64_t seed = 0;
    std::vector<double> ratios{0.7, 0.1, 0.2};
};

struct ServeOptions {
    fs::path manifest = "manifest.csv";
    fs::path image_root;
    fs::path store = "responses.csv";
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t target = 5;
    double expiry_minutes = 30.0;
    fs::path ui;
};

struct AggregateOptions {
    fs::path responses = "responses.csv";
    fs::path out = "labels";
    std::size_t min_annotators = vsa::crowd::kDefaultMinAnnotators;
    double min_elapsed = vsa::crowd::kDefaultMinElapsedSeconds;
};

struct StatsOptions {
    fs::path responses = "responses.csv";
    fs::path out = "stats_report.json";
    std::size_t min_annotators = vsa::crowd::kDefaultMinAnnotators;
    double min_elapsed = vsa::crowd::kDefaultMinElapsedSeconds;
    std::size_t top_k = 20;
};

struct ResampleOptions {
    fs::path labels;
    std::string mode = "single";
    double rho = 0.0;
    std::uint64_t seed = 0;
    double growth_cap = vsa::resample::kDefaultGrowthCap;
    fs::path out = "plan.json";
};

struct TrainOptions {
    std::string task = "TASK1";
    fs::path manifest = "manifest.csv";
    fs::path image_root;
    fs::path labels = "labels";
    fs::path splits;
    fs::path weights = "weights";
    std::string architecture = "VGGNet";
    std::string pretraining = "scene_centric";
    std::string fuse_scene;
    fs::path out = "run";
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    double learning_rate = 1e-4;
    std::string optimizer = "adam";
    std::string freeze = "none";
    std::string oversample = "off";
    double rho = 0.0;
    double growth_cap = vsa::resample::kDefaultGrowthCap;
    std::uint64_t seed = 0;
    std::string early_stop = "val_f1";
    std::size_t patience = 5;
    double threshold = 0.5;
    bool parallel_loading = false;
};

struct EvaluateOptions {
    fs::path checkpoint;
    std::string task;
    fs::path manifest;
    fs::path image_root;
    fs::path labels;
    fs::path splits;
    std::string split = "test";
    std::string name;
    fs::path out = "metrics.json";
    std::size_t batch_size = 32;
};

struct ReportOptions {
    std::vector<fs::path> metrics;
    fs::path out = "report";
    std::string aggregate = "macro";
};

// Labels path may name a file or a directory holding labels_setN.csv.
fs::path label_path(const fs::path& labels, vsa::corpus::LabelSetId set) {
    return fs::is_directory(labels) ? labels / vsa::crowd::label_file_name(set) : labels;
}

struct Dataset {
    vsa::LabelMatrix labels;
    std::vector<fs::path> images;
};

// Label rows restricted to images listed in the manifest, in label-file order.
Dataset load_dataset(const fs::path& manifest_path, const fs::path& image_root, const fs::path& labels,
                     const vsa::train::TaskInfo& task) {
    const auto manifest = vsa::corpus::load_manifest(
        manifest_path, image_root.empty() ? std::nullopt : std::optional<fs::path>(image_root));
    for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << '\n';
    const auto matrix = vsa::crowd::read_label_file(label_path(labels, task.label_set), task.label_set);
    Dataset data;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        const auto& id = matrix.sample_ids()[i];
        const auto pos = manifest.find(id);
        if (!pos) {
            std::cerr << "warning: labeled image '" << id << "' is not in the manifest; skipped\n";
            continue;
        }
        const auto& record = manifest.records()[*pos];
        if (!record.resolvable) {
            std::cerr << "warning: image file for '" << id << "' not found; skipped\n";
            continue;
        }
        keep.push_back(i);
        data.images.push_back(manifest.resolve(record));
    }
    data.labels = matrix.select_rows(keep);
    if (data.labels.rows() == 0) throw vsa::Error(vsa::ErrorKind::invalid_argument, "no labeled images to use");
    return data;
}

vsa::corpus::SplitRatios ratios_from(const std::vector<double>& r) {
    if (r.size() != 3) throw vsa::Error(vsa::ErrorKind::invalid_argument, "--ratios takes three values");
    return {r[0], r[1], r[2]};
}

// splits.json over a superset of the labeled images (as written by ingest):
// ids without labels are dropped.
vsa::corpus::SplitAssignment read_splits_subset(const fs::path& path, const std::vector<std::string>& ids) {
    std::ifstream in(path);
    if (!in) throw vsa::Error(vsa::ErrorKind::not_found, "splits file not found: '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw vsa::Error(vsa::ErrorKind::parse, "cannot parse '" + path.string() + "': " + e.what());
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
    vsa::corpus::SplitAssignment s;
    s.seed = j.value("seed", std::uint64_t{0});
    std::size_t dropped = 0;
    const auto fill = [&](const char* key, std::vector<std::size_t>& out) {
        for (const auto& id : j.at(key)) {
            const auto it = index.find(id.get<std::string>());
            if (it == index.end()) {
                ++dropped;
                continue;
            }
            out.push_back(it->second);
        }
        std::sort(out.begin(), out.end());
    };
    fill("train", s.train);
    fill("val", s.val);
    fill("test", s.test);
    if (dropped) std::cerr << "note: " << dropped << " split entries have no labels and are ignored\n";
    if (s.total() != ids.size()) {
        std::cerr << "warning: " << ids.size() - std::min(ids.size(), s.total())
                  << " labeled images are in no split\n";
    }
    return s;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw vsa::Error(vsa::ErrorKind::not_found, "cannot write '" + path.string() + "'");
    out << text;
}

std::vector<vsa::crowd::CrowdResponse> load_responses(const fs::path& path, double min_elapsed) {
    auto ingested = vsa::crowd::ingest_responses(path);
    for (const auto& r : ingested.rejected) {
        std::cerr << "warning: " << path.string() << ":" << r.line << ": " << r.message << '\n';
    }
    auto filtered = vsa::crowd::filter_responses(ingested.responses, min_elapsed);
    std::cout << "responses: " << ingested.responses.size() << " valid, " << ingested.rejected.size()
              << " rejected, " << filtered.removed << " removed by the " << min_elapsed << " s filter\n";
    return std::move(filtered.kept);
}

int run_ingest(const IngestOptions& o) {
    auto records = vsa::corpus::scan_image_directory(o.images, o.license);
    const auto manifest_dir = fs::absolute(o.out).parent_path();
    const auto prefix = fs::relative(fs::absolute(o.images), manifest_dir);
    for (auto& r : records) r.relative_path = (prefix / r.relative_path).lexically_normal().generic_string();
    vsa::corpus::write_manifest(o.out, records);
    const auto manifest = vsa::corpus::load_manifest(o.out);
    for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "manifest: " << manifest.size() << " images -> " << o.out.string() << '\n';
    if (!o.splits.empty()) {
        const auto splits = vsa::corpus::make_splits(manifest.size(), ratios_from(o.ratios), o.seed);
        std::vector<std::string> ids;
        for (const auto& r : manifest.records()) ids.push_back(r.image_id);
        vsa::corpus::write_splits_json(o.splits, splits, ids);
        std::cout << "splits: " << splits.train.size() << "/" << splits.val.size() << "/" << splits.test.size()
                  << " -> " << o.splits.string() << '\n';
    }
    return 0;
}

vsa::service::AnnotationServer* g_server = nullptr;

void handle_signal(int) {
    if (g_server) g_server->stop();
}

int run_serve(const ServeOptions& o) {
    auto manifest = vsa::corpus::load_manifest(
        o.manifest, o.image_root.empty() ? std::nullopt : std::optional<fs::path>(o.image_root));
    for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << '\n';
    vsa::service::ServerConfig config;
    config.host = o.host;
    config.port = o.port;
    config.store_path = o.store;
    if (const char* token = std::getenv(vsa::service::kAdminTokenEnv)) config.admin_token = token;
    if (config.admin_token.empty()) {
        std::cerr << "warning: " << vsa::service::kAdminTokenEnv << " is not set; /api/export is disabled\n";
    }
    if (!o.ui.empty()) config.ui_dir = o.ui;
    config.assignment.target_responses = o.target;
    config.assignment.expiry = std::chrono::seconds(static_cast<long long>(o.expiry_minutes * 60.0));
    vsa::service::AnnotationServer server(std::move(manifest), config);
    for (const auto& w : server.startup_warnings()) std::cerr << "warning: " << w << '\n';
    const int port = server.bind();
    std::cout << "serving " << server.state().image_count() << " images on http://" << o.host << ":" << port
              << " (" << server.store().size() << " stored responses)" << std::endl;
    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    server.serve();
    g_server = nullptr;
    return 0;
}

int run_aggregate(const AggregateOptions& o) {
    const auto responses = load_responses(o.responses, o.min_elapsed);
    const auto result = vsa::crowd::aggregate_all(responses, o.min_annotators);
    const auto exported = vsa::crowd::export_label_sets(result.annotations, o.out, o.min_annotators);
    for (const auto& id : exported.excluded) {
        std::cerr << "warning: image '" << id << "' has fewer than " << o.min_annotators
                  << " responses; excluded\n";
    }
    for (const auto& f : exported.files) std::cout << "wrote " << f.string() << '\n';
    return 0;
}

int run_stats(const StatsOptions& o) {
    const auto responses = load_responses(o.responses, o.min_elapsed);
    const auto result = vsa::crowd::aggregate_all(responses, o.min_annotators);
    vsa::crowd::write_stats_report(o.out, responses, result.annotations, o.top_k);
    std::cout << "wrote " << o.out.string() << '\n';
    return 0;
}

int run_resample(const ResampleOptions& o) {
    const auto matrix = vsa::crowd::read_label_file(o.labels);
    vsa::resample::ResamplePlan plan;
    if (o.mode == "single") {
        if (!matrix.is_single_label()) {
            throw vsa::Error(vsa::ErrorKind::invalid_argument, "single mode needs a single-label file");
        }
        plan = vsa::resample::oversample_single_label(matrix.single_labels(), matrix.class_names(),
                                                      o.rho > 0 ? o.rho : vsa::resample::kDefaultSingleLabelRho,
                                                      o.seed);
    } else if (o.mode == "multilabel") {
        plan = vsa::resample::oversample_multilabel(matrix, o.rho > 0 ? o.rho : vsa::resample::kDefaultMultiLabelRho,
                                                    o.seed, o.growth_cap);
    } else {
        throw vsa::Error(vsa::ErrorKind::invalid_argument, "unknown mode '" + o.mode + "'");
    }
    vsa::resample::write_plan(o.out, plan, matrix.sample_ids());
    std::cout << "class            before  after\n";
    for (std::size_t c = 0; c < plan.class_names.size(); ++c) {
        char line[96];
        std::snprintf(line, sizeof line, "%-16s %6zu %6zu\n", plan.class_names[c].c_str(), plan.before[c],
                      plan.after[c]);
        std::cout << line;
    }
    std::cout << "rows: " << plan.original_rows << " -> " << plan.index_multiset.size() << "; wrote "
              << o.out.string() << '\n';
    return 0;
}

int run_train(const TrainOptions& o, const std::string& resolved_config) {
    using namespace vsa;
    train::TrainConfig config;
    config.task = train::parse_task(o.task);
    config.epochs = o.epochs;
    config.batch_size = o.batch_size;
    config.learning_rate = o.learning_rate;
    config.optimizer = train::parse_optimizer_kind(o.optimizer);
    config.freeze = model::parse_freeze_policy(o.freeze);
    config.oversample = train::parse_oversample_mode(o.oversample);
    config.rho = o.rho;
    config.growth_cap = o.growth_cap;
    config.seed = o.seed;
    config.early_stop = train::parse_early_stop_metric(o.early_stop);
    config.patience = o.patience;
    config.deterministic = !o.parallel_loading;
    config.validate();
    const auto& task = train::task_info(config.task);

    const auto data = load_dataset(o.manifest, o.image_root, o.labels, task);
    corpus::SplitAssignment splits;
    if (!o.splits.empty() && fs::exists(o.splits)) {
        splits = read_splits_subset(o.splits, data.labels.sample_ids());
    } else if (task.mode == model::HeadMode::single_label) {
        splits = corpus::make_stratified_splits(data.labels.single_labels(), {}, o.seed);
    } else {
        splits = corpus::make_splits(data.labels.rows(), {}, o.seed);
    }

    model::HeadSpec head{task.mode, task.num_classes, o.threshold};
    const auto arch = model::parse_architecture(o.architecture);
    model::ClassifierSpec spec;
    if (o.fuse_scene.empty()) {
        const auto pre = model::parse_pretraining(o.pretraining);
        spec = model::BackboneSpec{arch, pre, model::architecture_info(arch).feature_dim};
    } else {
        const auto scene = model::parse_architecture(o.fuse_scene);
        spec = model::FusionSpec{
            {arch, model::Pretraining::object_centric, model::architecture_info(arch).feature_dim},
            {scene, model::Pretraining::scene_centric, model::architecture_info(scene).feature_dim}};
    }
    auto classifier = model::build_classifier(spec, head, o.weights, o.seed);
    const train::DiskImages images(data.images, classifier.preprocessing());

    fs::create_directories(o.out);
    write_text(o.out / "config.toml", resolved_config);
    corpus::write_splits_json(o.out / "splits.json", splits, data.labels.sample_ids());

    std::cout << "training " << task.name << " on " << splits.train.size() << " images (val "
              << splits.val.size() << ", test " << splits.test.size() << ")" << std::endl;
    auto result = train::finetune(std::move(classifier), images, data.labels, splits, config);
    for (const auto& e : result.history.epochs) {
        std::printf("epoch %3zu  train_loss %.5f  val_loss %.5f  val_f1 %.4f  %.1fs\n", e.epoch, e.train_loss,
                    e.val_loss, e.val_f1, e.seconds);
    }
    if (result.plan) {
        std::vector<std::string> train_ids;
        for (auto i : splits.train) train_ids.push_back(data.labels.sample_ids()[i]);
        resample::write_plan(o.out / "plan.json", *result.plan, train_ids);
    }
    train::write_history_csv(o.out / "history.csv", result.history);

    json metadata{{"history", train::history_to_json(result.history)},
                  {"manifest", fs::absolute(o.manifest).string()},
                  {"image_root", o.image_root.empty() ? "" : fs::absolute(o.image_root).string()},
                  {"labels", fs::absolute(label_path(o.labels, task.label_set)).string()},
                  {"splits", fs::absolute(o.out / "splits.json").string()},
                  {"name", o.out.filename().string()}};
    model::save_checkpoint(o.out / "model.ckpt", result.classifier, task.name, data.labels.class_names(), metadata);
    std::cout << "wrote " << (o.out / "model.ckpt").string() << '\n';
    return 0;
}

int run_evaluate(const EvaluateOptions& o) {
    using namespace vsa;
    const auto task = train::task_info(train::parse_task(o.task));
    auto checkpoint = model::load_checkpoint(o.checkpoint, task.name);
    const auto& meta = checkpoint.metadata;
    const auto pick = [&](const fs::path& flag, const char* key) {
        if (!flag.empty()) return flag;
        if (meta.contains(key) && meta[key].is_string()) return fs::path(meta[key].get<std::string>());
        return fs::path();
    };
    const auto manifest = pick(o.manifest, "manifest");
    const auto labels = pick(o.labels, "labels");
    const auto splits_path = pick(o.splits, "splits");
    if (manifest.empty() || labels.empty()) {
        throw Error(ErrorKind::invalid_argument, "--manifest and --labels are required for this checkpoint");
    }
    const auto data = load_dataset(manifest, pick(o.image_root, "image_root"), labels, task);
    if (data.labels.class_names() != checkpoint.class_names) {
        throw Error(ErrorKind::task_mismatch, "label classes differ from the checkpoint's classes");
    }
    std::vector<std::size_t> rows;
    if (o.split == "all") {
        rows.resize(data.labels.rows());
        std::iota(rows.begin(), rows.end(), 0);
    } else {
        if (splits_path.empty()) throw Error(ErrorKind::invalid_argument, "--splits is required");
        const auto splits = read_splits_subset(splits_path, data.labels.sample_ids());
        if (o.split == "test") rows = splits.test;
        else if (o.split == "val") rows = splits.val;
        else if (o.split == "train") rows = splits.train;
        else throw Error(ErrorKind::invalid_argument, "unknown split '" + o.split + "'");
    }
    const train::DiskImages images(data.images, checkpoint.classifier.preprocessing());
    const auto result = train::evaluate_rows(checkpoint.classifier, images, data.labels, rows, o.batch_size, true);

    eval::RunMetrics run;
    run.name = !o.name.empty() ? o.name : meta.value("name", o.checkpoint.stem().string());
    run.task = std::string(task.name);
    run.report = result.report;
    eval::write_metrics_json(o.out, run);
    std::cout << run.name << " on " << rows.size() << " " << o.split << " images: accuracy "
              << eval::format_percent(run.report.macro.accuracy) << ", macro F1 "
              << eval::format_percent(run.report.macro.f1) << ", exact match "
              << eval::format_percent(run.report.exact_match) << "\nwrote " << o.out.string() << '\n';
    return 0;
}

int run_report(const ReportOptions& o) {
    std::vector<vsa::eval::RunMetrics> runs;
    for (const auto& path : o.metrics) runs.push_back(vsa::eval::read_metrics_json(path));
    const auto kind = o.aggregate == "weighted" ? vsa::eval::AggregateKind::weighted : vsa::eval::AggregateKind::macro;
    if (o.aggregate != "weighted" && o.aggregate != "macro") {
        throw vsa::Error(vsa::ErrorKind::invalid_argument, "--aggregate is macro or weighted");
    }
    const auto tables = vsa::eval::report_table(runs, kind);
    const std::string task = runs.empty() ? "TASK1" : runs.front().task;
    vsa::eval::write_report(o.out, task, tables);
    std::cout << tables.text << '\n' << tables.per_class_text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Visual sentiment analysis pipeline for disaster images"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML file with option values; flags override it");
    app.option_defaults()->always_capture_default();

    IngestOptions ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Build manifest.csv from an image directory");
    ingest_cmd->add_option("--images", ingest.images, "Image directory (keyword subdirectories)")->required();
    ingest_cmd->add_option("--out", ingest.out, "Manifest to write");
    ingest_cmd->add_option("--license", ingest.license, "License recorded for every image");
    ingest_cmd->add_option("--splits", ingest.splits, "Also write splits.json here");
    ingest_cmd->add_option("--seed", ingest.seed, "Split seed");
    ingest_cmd->add_option("--ratios", ingest.ratios, "Train, validation and test fractions")->expected(3);

    ServeOptions serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the annotation service");
    serve_cmd->add_option("--manifest", serve.manifest, "Image manifest");
    serve_cmd->add_option("--image-root", serve.image_root, "Directory image paths resolve against");
    serve_cmd->add_option("--store", serve.store, "Append-only response log");
    serve_cmd->add_option("--host", serve.host, "Listen address");
    serve_cmd->add_option("--port", serve.port, "Listen port (0 picks a free port)");
    serve_cmd->add_option("--target", serve.target, "Responses collected per image");
    serve_cmd->add_option("--expiry-minutes", serve.expiry_minutes, "Assignment expiry");
    serve_cmd->add_option("--ui", serve.ui, "Static annotation UI directory");
    serve_cmd->footer(std::string("The admin token for /api/export is read from ") + vsa::service::kAdminTokenEnv + ".");

    AggregateOptions aggregate;
    auto* aggregate_cmd = app.add_subcommand("aggregate", "Aggregate responses into the four label files");
    aggregate_cmd->add_option("--responses", aggregate.responses, "Response CSV");
    aggregate_cmd->add_option("--out", aggregate.out, "Output directory");
    aggregate_cmd->add_option("--min-annotators", aggregate.min_annotators, "Responses needed per image");
    aggregate_cmd->add_option("--min-elapsed", aggregate.min_elapsed, "Drop responses faster than this (seconds)");

    StatsOptions stats;
    auto* stats_cmd = app.add_subcommand("stats", "Write response distributions and tag co-occurrence");
    stats_cmd->add_option("--responses", stats.responses, "Response CSV");
    stats_cmd->add_option("--out", stats.out, "Report JSON");
    stats_cmd->add_option("--min-annotators", stats.min_annotators, "Responses needed per image");
    stats_cmd->add_option("--min-elapsed", stats.min_elapsed, "Drop responses faster than this (seconds)");
    stats_cmd->add_option("--top-k", stats.top_k, "Co-occurrence entries kept per ranking");

    ResampleOptions resample;
    auto* resample_cmd = app.add_subcommand("resample", "Write an oversampling plan for a label file");
    resample_cmd->add_option("--labels", resample.labels, "Label file")->required();
    resample_cmd->add_option("--mode", resample.mode, "single or multilabel")->check(CLI::IsMember({"single", "multilabel"}));
    resample_cmd->add_option("--rho", resample.rho, "Target ratio to the majority support (0: 1.0 single, 0.6 multilabel)");
    resample_cmd->add_option("--seed", resample.seed, "Sampling seed");
    resample_cmd->add_option("--growth-cap", resample.growth_cap, "Abort when rows would exceed cap x N");
    resample_cmd->add_option("--out", resample.out, "Plan JSON");

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Fine-tune a classifier");
    train_cmd->add_option("--task", train.task, "TASK1, TASK2 or TASK3");
    train_cmd->add_option("--manifest", train.manifest, "Image manifest");
    train_cmd->add_option("--image-root", train.image_root, "Directory image paths resolve against");
    train_cmd->add_option("--labels", train.labels, "Label file or directory of label files");
    train_cmd->add_option("--splits", train.splits, "Existing splits.json (created when absent)");
    train_cmd->add_option("--weights", train.weights, "Directory of pretrained .vsw weights");
    train_cmd->add_option("--arch", train.architecture, "Backbone architecture");
    train_cmd->add_option("--pretraining", train.pretraining, "object_centric or scene_centric");
    train_cmd->add_option("--fuse-scene", train.fuse_scene,
                          "Fuse --arch (object-centric) with this scene-centric architecture");
    train_cmd->add_option("--out", train.out, "Run directory");
    train_cmd->add_option("--epochs", train.epochs, "Training epochs");
    train_cmd->add_option("--batch-size", train.batch_size, "Batch size");
    train_cmd->add_option("--lr", train.learning_rate, "Learning rate");
    train_cmd->add_option("--optimizer", train.optimizer, "adam or sgd");
    train_cmd->add_option("--freeze", train.freeze, "none or head_only");
    train_cmd->add_option("--oversample", train.oversample, "off, single or multilabel");
    train_cmd->add_option("--rho", train.rho, "Oversampling ratio (0: mode default)");
    train_cmd->add_option("--growth-cap", train.growth_cap, "Oversampling growth cap");
    train_cmd->add_option("--seed", train.seed, "Seed for splits, initialization and shuffling");
    train_cmd->add_option("--early-stop", train.early_stop, "val_f1 or val_loss");
    train_cmd->add_option("--patience", train.patience, "Epochs without improvement before stopping (0: off)");
    train_cmd->add_option("--threshold", train.threshold, "Multi-label decision threshold");
    train_cmd->add_flag("--parallel-loading", train.parallel_loading, "Decode images on several threads");

    EvaluateOptions evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint and write metrics.json");
    evaluate_cmd->add_option("--checkpoint", evaluate.checkpoint, "Checkpoint file")->required();
    evaluate_cmd->add_option("--task", evaluate.task, "TASK1, TASK2 or TASK3")->required();
    evaluate_cmd->add_option("--manifest", evaluate.manifest, "Image manifest (default: from the checkpoint)");
    evaluate_cmd->add_option("--image-root", evaluate.image_root, "Directory image paths resolve against");
    evaluate_cmd->add_option("--labels", evaluate.labels, "Label file or directory (default: from the checkpoint)");
    evaluate_cmd->add_option("--splits", evaluate.splits, "splits.json (default: from the checkpoint)");
    evaluate_cmd->add_option("--split", evaluate.split, "test, val, train or all");
    evaluate_cmd->add_option("--name", evaluate.name, "Model name shown in reports");
    evaluate_cmd->add_option("--out", evaluate.out, "Metrics JSON");
    evaluate_cmd->add_option("--batch-size", evaluate.batch_size, "Inference batch size");

    ReportOptions report;
    auto* report_cmd = app.add_subcommand("report", "Render result tables from metrics.json files");
    report_cmd->add_option("--metrics", report.metrics, "metrics.json files, one per model")->required();
    report_cmd->add_option("--out", report.out, "Output directory");
    report_cmd->add_option("--aggregate", report.aggregate, "macro or weighted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*ingest_cmd) return run_ingest(ingest);
        if (*serve_cmd) return run_serve(serve);
        if (*aggregate_cmd) return run_aggregate(aggregate);
        if (*stats_cmd) return run_stats(stats);
        if (*resample_cmd) return run_resample(resample);
        if (*train_cmd) return run_train(train, app.config_to_str(true, false));
        if (*evaluate_cmd) return run_evaluate(evaluate);
        if (*report_cmd) return run_report(report);
    } catch (const vsa::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
