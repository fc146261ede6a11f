#include "vsa/resample/oversample.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "vsa/core/error.hpp"
#include "vsa/core/rng.hpp"

namespace vsa::resample {

std::vector<std::size_t> class_supports(const LabelMatrix& matrix) {
    std::vector<std::size_t> supports(matrix.cols(), 0);
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        const auto row = matrix.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) supports[c] += row[c];
    }
    return supports;
}

namespace {

std::size_t argmax_first(const std::vector<std::size_t>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

void check_rho(double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) {
        throw Error(ErrorKind::invalid_argument, "rho must lie in (0, 1]");
    }
}

}  // namespace

std::size_t majority_class(const LabelMatrix& matrix) {
    const auto supports = class_supports(matrix);
    if (supports.empty() || *std::max_element(supports.begin(), supports.end()) == 0) {
        throw Error(ErrorKind::invalid_argument, "majority class undefined: every class has zero support");
    }
    return argmax_first(supports);
}

double phi_coefficient(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) throw Error(ErrorKind::shape_mismatch, "phi: column lengths differ");
    double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && b[i]) ++n11;
        else if (a[i]) ++n10;
        else if (b[i]) ++n01;
        else ++n00;
    }
    const double denom = (n11 + n10) * (n01 + n00) * (n11 + n01) * (n10 + n00);
    if (denom == 0.0) return 0.0;
    return (n11 * n00 - n10 * n01) / std::sqrt(denom);
}

CorrelationGroups correlation_groups(const LabelMatrix& matrix) {
    CorrelationGroups groups;
    groups.majority = majority_class(matrix);
    const auto majority_column = matrix.column(groups.majority);
    groups.phi.assign(matrix.cols(), 0.0);
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
        if (c == groups.majority) {
            groups.phi[c] = 1.0;
            continue;
        }
        const auto column = matrix.column(c);
        groups.phi[c] = phi_coefficient(column, majority_column);
        (groups.phi[c] >= 0.0 ? groups.positive : groups.negative).push_back(c);
    }
    return groups;
}

std::size_t oversample_target(double rho, std::size_t majority_support) {
    return static_cast<std::size_t>(std::ceil(rho * static_cast<double>(majority_support) - 1e-9));
}

ResamplePlan oversample_single_label(std::span<const std::size_t> labels,
                                     std::span<const std::string> class_names, double rho,
                                     std::uint64_t seed) {
    check_rho(rho);
    const auto classes = class_names.size();
    std::vector<std::vector<std::size_t>> rows_of(classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= classes) throw Error(ErrorKind::out_of_range, "label index outside class list");
        rows_of[labels[i]].push_back(i);
    }

    ResamplePlan plan;
    plan.mode = PlanMode::single_label;
    plan.class_names.assign(class_names.begin(), class_names.end());
    plan.rho = rho;
    plan.seed = seed;
    plan.original_rows = labels.size();
    for (const auto& rows : rows_of) plan.before.push_back(rows.size());
    for (std::size_t c = 0; c < classes; ++c) {
        if (plan.before[c] == 0) {
            throw Error(ErrorKind::invalid_argument,
                        "class '" + plan.class_names[c] + "' has zero support and cannot be oversampled");
        }
    }
    const auto majority = plan.before[argmax_first(plan.before)];
    const auto target = oversample_target(rho, majority);

    plan.index_multiset.resize(labels.size());
    std::iota(plan.index_multiset.begin(), plan.index_multiset.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t c = 0; c < classes; ++c) {
        plan.targets.push_back(target);
        const auto& rows = rows_of[c];
        for (auto support = rows.size(); support < target; ++support) {
            plan.index_multiset.push_back(rows[rng.uniform_index(rows.size())]);
        }
        plan.after.push_back(std::max(rows.size(), target));
        plan.processing_order.push_back(c);
    }
    return plan;
}

ResamplePlan oversample_multilabel(const LabelMatrix& matrix, double rho, std::uint64_t seed,
                                   double growth_cap) {
    check_rho(rho);
    ResamplePlan plan;
    plan.mode = PlanMode::multi_label;
    plan.class_names = matrix.class_names();
    plan.rho = rho;
    plan.seed = seed;
    plan.original_rows = matrix.rows();
    plan.before = class_supports(matrix);
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
        if (plan.before[c] == 0) {
            throw Error(ErrorKind::invalid_argument,
                        "class '" + plan.class_names[c] + "' has zero support and cannot be oversampled");
        }
    }

    const auto groups = correlation_groups(matrix);
    const auto target = oversample_target(rho, plan.before[groups.majority]);
    plan.targets.assign(matrix.cols(), target);

    auto by_support = [&](std::vector<std::size_t> group) {
        std::stable_sort(group.begin(), group.end(), [&](std::size_t a, std::size_t b) {
            return plan.before[a] > plan.before[b];
        });
        return group;
    };
    for (auto c : by_support(groups.positive)) plan.processing_order.push_back(c);
    for (auto c : by_support(groups.negative)) plan.processing_order.push_back(c);

    std::vector<std::vector<std::size_t>> carriers(matrix.cols());
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        for (std::size_t c = 0; c < matrix.cols(); ++c) {
            if (matrix.at(r, c)) carriers[c].push_back(r);
        }
    }

    const auto cap = static_cast<std::size_t>(std::floor(growth_cap * static_cast<double>(matrix.rows())));
    plan.index_multiset.resize(matrix.rows());
    std::iota(plan.index_multiset.begin(), plan.index_multiset.end(), std::size_t{0});
    auto current = plan.before;
    Rng rng(seed);
    for (auto c : plan.processing_order) {
        const auto& rows = carriers[c];
        while (current[c] < target) {
            const auto pick = rows[rng.uniform_index(rows.size())];
            if (plan.index_multiset.size() + 1 > cap) {
                throw Error(ErrorKind::growth_cap_exceeded,
                            "oversampling class '" + plan.class_names[c] + "' would exceed the growth cap of " +
                                std::to_string(cap) + " rows (" + std::to_string(growth_cap) + " x " +
                                std::to_string(matrix.rows()) + "); support " + std::to_string(current[c]) +
                                " of target " + std::to_string(target));
            }
            plan.index_multiset.push_back(pick);
            const auto row = matrix.row(pick);
            for (std::size_t k = 0; k < row.size(); ++k) current[k] += row[k];
        }
    }
    plan.after = std::move(current);
    return plan;
}

std::string plan_to_json(const ResamplePlan& plan, std::span<const std::string> sample_ids) {
    nlohmann::ordered_json doc;
    doc["mode"] = plan.mode == PlanMode::single_label ? "single" : "multilabel";
    doc["seed"] = plan.seed;
    doc["rho"] = plan.rho;
    doc["classes"] = plan.class_names;
    auto per_class = [&](const std::vector<std::size_t>& values) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t c = 0; c < values.size() && c < plan.class_names.size(); ++c) {
            obj[plan.class_names[c]] = values[c];
        }
        return obj;
    };
    doc["targets"] = per_class(plan.targets);
    doc["before"] = per_class(plan.before);
    doc["after"] = per_class(plan.after);
    auto order = nlohmann::ordered_json::array();
    for (auto c : plan.processing_order) order.push_back(plan.class_names[c]);
    doc["processing_order"] = order;
    doc["original_rows"] = plan.original_rows;
    doc["total_rows"] = plan.index_multiset.size();
    doc["index_multiset"] = plan.index_multiset;
    if (!sample_ids.empty()) {
        auto ids = nlohmann::ordered_json::array();
        for (auto i : plan.index_multiset) ids.push_back(sample_ids[i]);
        doc["sample_multiset"] = ids;
    }
    return doc.dump(2);
}

void write_plan(const std::filesystem::path& path, const ResamplePlan& plan,
                std::span<const std::string> sample_ids) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::not_found, "cannot write '" + path.string() + "'");
    out << plan_to_json(plan, sample_ids) << '\n';
}

}  // namespace vsa::resample
