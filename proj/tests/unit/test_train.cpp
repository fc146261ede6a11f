#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "support.hpp"
#include "vsa/core/error.hpp"
#include "vsa/model/image_io.hpp"
#include "vsa/train/config.hpp"
#include "vsa/train/optimizer.hpp"
#include "vsa/train/trainer.hpp"

using namespace vsa;
using namespace vsa::train;
using model::HeadMode;

namespace {

corpus::SplitAssignment fixed_splits(std::size_t n, std::size_t val, std::size_t test) {
    corpus::SplitAssignment s;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 4 == 1 && s.val.size() < val) {
            s.val.push_back(i);
        } else if (i % 4 == 3 && s.test.size() < test) {
            s.test.push_back(i);
        } else {
            s.train.push_back(i);
        }
    }
    return s;
}

TrainConfig quick_config(std::size_t epochs) {
    TrainConfig c;
    c.task = Task::task1;
    c.epochs = epochs;
    c.batch_size = 8;
    c.learning_rate = 5e-3;
    c.seed = 3;
    c.patience = 0;
    return c;
}

}  // namespace

TEST_SUITE("train") {
    TEST_CASE("task table and config parsing") {
        CHECK(task_info(Task::task2).num_classes == 7);
        CHECK(task_info(Task::task3).label_set == corpus::LabelSetId::set4);
        CHECK(task_info(Task::task1).mode == HeadMode::single_label);
        CHECK(parse_task("task3") == Task::task3);
        CHECK_THROWS_AS(parse_task("TASK4"), Error);
        TrainConfig c;
        CHECK(c.effective_rho() == 1.0);
        c.task = Task::task2;
        c.oversample = OversampleMode::multilabel;
        CHECK(c.effective_rho() == doctest::Approx(0.6));
        CHECK_NOTHROW(c.validate());
        c.oversample = OversampleMode::single;
        CHECK_THROWS_AS(c.validate(), Error);
        TrainConfig bad;
        bad.batch_size = 0;
        CHECK_THROWS_AS(bad.validate(), Error);
    }

    TEST_CASE("optimizers descend a quadratic and skip frozen blocks") {
        for (auto kind : {OptimizerKind::adam, OptimizerKind::sgd}) {
            std::vector<double> x{3.0, -2.0}, y{1.0};
            Optimizer opt(kind, 0.05, {2, 1});
            for (int step = 0; step < 400; ++step) {
                std::vector<std::vector<double>> grads{{2 * x[0], 2 * x[1]}, {}};
                const std::vector<std::span<double>> params{x, y};
                opt.step(params, grads);
            }
            CHECK(std::abs(x[0]) < 0.05);
            CHECK(std::abs(x[1]) < 0.05);
            CHECK(y[0] == 1.0);
            CHECK(opt.steps() == 400);
        }
        Optimizer opt(OptimizerKind::sgd, 0.1, {2});
        std::vector<double> p{1.0};
        const std::vector<std::span<double>> params{p};
        CHECK_THROWS_AS(opt.step(params, {{1.0}}), Error);
    }

    TEST_CASE("zero epochs returns the input model") {
        auto toy = testing::toy_task1(12, 8, 1);
        const auto c = testing::tiny_classifier(8, 4, HeadMode::single_label, 3, 2);
        const auto result = finetune(c, toy.images, toy.labels, fixed_splits(12, 2, 2), quick_config(0));
        CHECK(result.classifier == c);
        CHECK(result.history.epochs.empty());
        CHECK_FALSE(result.history.best_epoch);
    }

    TEST_CASE("deterministic runs give identical curves") {
        auto toy = testing::toy_task1(24, 8, 1);
        const auto c = testing::tiny_classifier(8, 4, HeadMode::single_label, 3, 2);
        const auto splits = fixed_splits(24, 4, 4);
        const auto a = finetune(c, toy.images, toy.labels, splits, quick_config(3));
        const auto b = finetune(c, toy.images, toy.labels, splits, quick_config(3));
        REQUIRE(a.history.epochs.size() == 3);
        for (std::size_t e = 0; e < 3; ++e) {
            CHECK(a.history.epochs[e].train_loss == b.history.epochs[e].train_loss);
            CHECK(a.history.epochs[e].val_loss == b.history.epochs[e].val_loss);
        }
        CHECK(a.classifier == b.classifier);
    }

    TEST_CASE("held-out rows never reach the optimizer") {
        auto toy = testing::toy_task1(30, 8, 4);
        const auto c = testing::tiny_classifier(8, 4, HeadMode::single_label, 3, 5);
        const auto splits = fixed_splits(30, 5, 5);
        auto config = quick_config(2);
        config.oversample = OversampleMode::single;
        std::set<std::size_t> held(splits.val.begin(), splits.val.end());
        held.insert(splits.test.begin(), splits.test.end());
        std::map<std::size_t, std::size_t> per_epoch;
        bool leaked = false;
        const auto result = finetune(c, toy.images, toy.labels, splits, config,
                                     [&](std::size_t epoch, std::span<const std::size_t> batch) {
                                         per_epoch[epoch] += batch.size();
                                         for (auto i : batch) leaked |= held.count(i) > 0;
                                     });
        CHECK_FALSE(leaked);
        REQUIRE(result.plan);
        CHECK(per_epoch[1] == result.plan->index_multiset.size());
        CHECK(per_epoch[2] == result.plan->index_multiset.size());
        CHECK(result.history.epochs[0].samples == result.epoch_samples.size());
        CHECK(result.plan->after[0] == result.plan->after[1]);
    }

    TEST_CASE("early stopping keeps the best validation epoch") {
        auto toy = testing::toy_task1(24, 8, 6);
        const auto c = testing::tiny_classifier(8, 4, HeadMode::single_label, 3, 7);
        const auto splits = fixed_splits(24, 6, 2);
        auto config = quick_config(8);
        config.learning_rate = 2e-2;
        config.patience = 2;
        config.early_stop = EarlyStopMetric::val_loss;
        const auto result = finetune(c, toy.images, toy.labels, splits, config);
        REQUIRE(result.history.best_epoch);
        double best = INFINITY;
        for (const auto& e : result.history.epochs) best = std::min(best, e.val_loss);
        const auto& chosen = result.history.epochs[*result.history.best_epoch - 1];
        CHECK(chosen.val_loss == best);
        const auto val = evaluate_rows(result.classifier, toy.images, toy.labels, splits.val);
        CHECK(val.loss == doctest::Approx(best).epsilon(1e-12));
    }

    TEST_CASE("multi-label training with oversampling") {
        const std::size_t n = 20;
        auto [images, single] = testing::toy_images(n, 8, 9);
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) ids.push_back("m" + std::to_string(i));
        LabelMatrix labels(ids, corpus::tag_names(corpus::LabelSetId::set3));
        for (std::size_t i = 0; i < n; ++i) {
            labels.set(i, single[i], true);
            labels.set(i, 3 + i % 4, true);
        }
        InMemoryImages source(images);
        auto config = quick_config(2);
        config.task = Task::task2;
        config.oversample = OversampleMode::multilabel;
        const auto c = testing::tiny_classifier(8, 4, HeadMode::multi_label, 7, 1);
        const auto result = finetune(c, source, labels, fixed_splits(n, 3, 3), config);
        CHECK(result.history.epochs.size() == 2);
        REQUIRE(result.plan);
        CHECK(result.plan->mode == resample::PlanMode::multi_label);
        CHECK(std::isfinite(result.history.epochs[1].val_loss));
    }

    TEST_CASE("input validation") {
        auto toy = testing::toy_task1(12, 8, 1);
        const auto c = testing::tiny_classifier(8, 4, HeadMode::single_label, 3, 2);
        auto overlapping = fixed_splits(12, 2, 2);
        overlapping.val.push_back(overlapping.train.front());
        CHECK_THROWS_AS(finetune(c, toy.images, toy.labels, overlapping, quick_config(1)), Error);
        auto config = quick_config(1);
        config.task = Task::task2;
        CHECK_THROWS_AS(finetune(c, toy.images, toy.labels, fixed_splits(12, 2, 2), config), Error);
        auto labels = toy.labels;
        labels.set(0, 1, true);
        labels.set(0, 0, true);
        CHECK_THROWS_AS(finetune(c, toy.images, labels, fixed_splits(12, 2, 2), quick_config(1)), Error);
    }

    TEST_CASE("diverging loss is reported") {
        model::Tensor nan_images({6, 3, 8, 8}, std::nan(""));
        InMemoryImages source(nan_images);
        const std::vector<std::size_t> y{0, 1, 2, 0, 1, 2};
        const auto labels = LabelMatrix::from_single_labels({"a", "b", "c", "d", "e", "f"},
                                                            {"positive", "negative", "neutral"}, y);
        corpus::SplitAssignment splits;
        splits.train = {0, 1, 2, 3, 4, 5};
        const auto c = testing::tiny_classifier(8, 4, HeadMode::single_label, 3, 2);
        try {
            finetune(c, source, labels, splits, quick_config(1));
            FAIL("expected non_finite");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::non_finite);
        }
    }

    TEST_CASE("disk images load the same serially and in parallel") {
        const auto dir = testing::temp_dir("disk");
        std::vector<std::filesystem::path> paths;
        for (int k = 0; k < 5; ++k) {
            std::vector<std::uint8_t> rgb(12 * 12 * 3, static_cast<std::uint8_t>(40 * k));
            paths.push_back(dir / ("i" + std::to_string(k) + ".png"));
            model::write_rgb_image(paths.back(), rgb, 12, 12);
        }
        model::Preprocessing p;
        p.height = p.width = 8;
        DiskImages disk(paths, p);
        CHECK(disk.sample_shape() == model::Shape{3, 8, 8});
        const std::vector<std::size_t> idx{4, 0, 2, 2};
        CHECK(disk.batch(idx, false) == disk.batch(idx, true));
        paths.push_back(dir / "missing.png");
        DiskImages broken(paths, p);
        const std::vector<std::size_t> bad{5};
        CHECK_THROWS_AS(broken.batch(bad, true), Error);
    }

    TEST_CASE("history csv") {
        const auto dir = testing::temp_dir("history");
        TrainHistory h;
        h.epochs.push_back({1, 0.5, 0.6, 0.7, 1.0, 10});
        h.best_epoch = 1;
        write_history_csv(dir / "history.csv", h);
        std::ifstream in(dir / "history.csv");
        std::string header;
        std::getline(in, header);
        CHECK(header == "epoch,train_loss,val_loss,val_f1,seconds");
        CHECK(history_to_json(h)["best_epoch"] == 1);
    }
}
