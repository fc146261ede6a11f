#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "vsa/corpus/label_sets.hpp"
#include "vsa/model/classifier.hpp"
#include "vsa/resample/oversample.hpp"

namespace vsa::train {

enum class Task { task1, task2, task3 };

struct TaskInfo {
    Task task;
    std::string_view name;  // "TASK1"
    corpus::LabelSetId label_set;
    model::HeadMode mode;
    std::size_t num_classes;
};

/// TASK1: SET1, single-label, 3 classes. TASK2: SET3, multi-label, 7.
/// TASK3: SET4, multi-label, 10.
const TaskInfo& task_info(Task task);
Task parse_task(std::string_view text);
std::string_view to_string(Task task);

enum class OptimizerKind { adam, sgd };
enum class OversampleMode { off, single, multilabel };
enum class EarlyStopMetric { val_f1, val_loss };

std::string_view to_string(OptimizerKind kind);
std::string_view to_string(OversampleMode mode);
std::string_view to_string(EarlyStopMetric metric);
OptimizerKind parse_optimizer_kind(std::string_view text);
OversampleMode parse_oversample_mode(std::string_view text);
EarlyStopMetric parse_early_stop_metric(std::string_view text);

struct TrainConfig {
    Task task = Task::task1;
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    double learning_rate = 1e-4;
    OptimizerKind optimizer = OptimizerKind::adam;
    model::FreezePolicy freeze = model::FreezePolicy::none;
    OversampleMode oversample = OversampleMode::off;
    /// Oversampling ratio; 0 selects the mode's default.
    double rho = 0.0;
    double growth_cap = resample::kDefaultGrowthCap;
    std::uint64_t seed = 0;
    EarlyStopMetric early_stop = EarlyStopMetric::val_f1;
    /// Epochs without improvement before stopping; 0 disables early stopping.
    std::size_t patience = 5;
    /// Single-threaded image loading. The numeric kernels are deterministic
    /// at any thread count.
    bool deterministic = true;

    /// Throws Error(invalid_argument) for out-of-range values.
    void validate() const;
    double effective_rho() const;
};

}  // namespace vsa::train
