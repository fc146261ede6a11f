#include "vsa/train/config.hpp"

#include <array>
#include <cctype>
#include <cmath>

#include "vsa/core/error.hpp"

namespace vsa::train {
namespace {

constexpr std::array<TaskInfo, 3> kTasks{{
    {Task::task1, "TASK1", corpus::LabelSetId::set1, model::HeadMode::single_label, 3},
    {Task::task2, "TASK2", corpus::LabelSetId::set3, model::HeadMode::multi_label, 7},
    {Task::task3, "TASK3", corpus::LabelSetId::set4, model::HeadMode::multi_label, 10},
}};

std::string upper(std::string_view text) {
    std::string out(text);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

const TaskInfo& task_info(Task task) { return kTasks[static_cast<std::size_t>(task)]; }

Task parse_task(std::string_view text) {
    const auto key = upper(text);
    for (const auto& t : kTasks) {
        if (t.name == key) return t.task;
    }
    throw Error(ErrorKind::invalid_argument, "unknown task '" + std::string(text) + "' (expected TASK1, TASK2 or TASK3)");
}

std::string_view to_string(Task task) { return task_info(task).name; }

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd"; }

std::string_view to_string(OversampleMode mode) {
    switch (mode) {
        case OversampleMode::off: return "off";
        case OversampleMode::single: return "single";
        case OversampleMode::multilabel: return "multilabel";
    }
    return "off";
}

std::string_view to_string(EarlyStopMetric metric) {
    return metric == EarlyStopMetric::val_f1 ? "val_f1" : "val_loss";
}

OptimizerKind parse_optimizer_kind(std::string_view text) {
    if (text == "adam") return OptimizerKind::adam;
    if (text == "sgd") return OptimizerKind::sgd;
    throw Error(ErrorKind::invalid_argument, "unknown optimizer '" + std::string(text) + "'");
}

OversampleMode parse_oversample_mode(std::string_view text) {
    if (text == "off" || text == "none") return OversampleMode::off;
    if (text == "single") return OversampleMode::single;
    if (text == "multilabel" || text == "multi") return OversampleMode::multilabel;
    throw Error(ErrorKind::invalid_argument, "unknown oversample mode '" + std::string(text) + "'");
}

EarlyStopMetric parse_early_stop_metric(std::string_view text) {
    if (text == "val_f1") return EarlyStopMetric::val_f1;
    if (text == "val_loss") return EarlyStopMetric::val_loss;
    throw Error(ErrorKind::invalid_argument, "unknown early-stop metric '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
    if (batch_size == 0) throw Error(ErrorKind::invalid_argument, "batch_size must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw Error(ErrorKind::invalid_argument, "learning_rate must be positive");
    }
    if (rho < 0.0 || rho > 1.0) throw Error(ErrorKind::invalid_argument, "rho must lie in (0,1]");
    if (!(growth_cap >= 1.0)) throw Error(ErrorKind::invalid_argument, "growth_cap must be at least 1");
    const auto mode = task_info(task).mode;
    if (oversample == OversampleMode::single && mode != model::HeadMode::single_label) {
        throw Error(ErrorKind::invalid_argument, "single-label oversampling needs a single-label task");
    }
    if (oversample == OversampleMode::multilabel && mode != model::HeadMode::multi_label) {
        throw Error(ErrorKind::invalid_argument, "multi-label oversampling needs a multi-label task");
    }
}

double TrainConfig::effective_rho() const {
    if (rho > 0.0) return rho;
    return oversample == OversampleMode::multilabel ? resample::kDefaultMultiLabelRho
                                                    : resample::kDefaultSingleLabelRho;
}

}  // namespace vsa::train
