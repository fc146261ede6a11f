#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vsa/core/label_matrix.hpp"

namespace vsa::resample {

/// Column sums in canonical class order.
std::vector<std::size_t> class_supports(const LabelMatrix& matrix);

/// Index of the class with the largest support (first in canonical order on
/// ties). Throws Error(invalid_argument) for an all-zero matrix.
std::size_t majority_class(const LabelMatrix& matrix);

/// Phi coefficient of two binary indicator columns of equal length.
/// Returns 0 when either column has zero variance.
double phi_coefficient(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

struct CorrelationGroups {
    std::size_t majority = 0;
    std::vector<std::size_t> positive;  // phi >= 0 with the majority column
    std::vector<std::size_t> negative;  // phi < 0
    std::vector<double> phi;            // per class; phi[majority] = 1
};

/// Splits the non-majority classes by the sign of their phi coefficient
/// with the majority class. Both groups are in canonical order.
CorrelationGroups correlation_groups(const LabelMatrix& matrix);

enum class PlanMode { single_label, multi_label };

struct ResamplePlan {
    PlanMode mode = PlanMode::single_label;
    std::vector<std::string> class_names;
    /// Original indices 0..N-1 in order, followed by duplicates in draw order.
    std::vector<std::size_t> index_multiset;
    double rho = 1.0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> targets;
    std::vector<std::size_t> before;
    std::vector<std::size_t> after;
    /// Multi-label only: order in which classes were visited.
    std::vector<std::size_t> processing_order;

    std::size_t original_rows = 0;

    std::size_t added_rows() const { return index_multiset.size() - original_rows; }

    friend bool operator==(const ResamplePlan&, const ResamplePlan&) = default;
};

inline constexpr double kDefaultSingleLabelRho = 1.0;
inline constexpr double kDefaultMultiLabelRho = 0.6;
inline constexpr double kDefaultGrowthCap = 4.0;

/// ceil(rho * majority_support), robust to floating-point noise in the product.
std::size_t oversample_target(double rho, std::size_t majority_support);

/// Random oversampling for single-label data: every class is brought up to
/// the target by drawing its rows uniformly with replacement. Classes in
/// canonical order. Throws Error(invalid_argument) for rho outside (0,1] or a
/// class with zero support.
ResamplePlan oversample_single_label(std::span<const std::size_t> labels,
                                     std::span<const std::string> class_names, double rho,
                                     std::uint64_t seed);

/// Correlation-grouped multi-label oversampling.
///
/// Targets are frozen from the original matrix. The positive group is visited
/// before the negative group; within a group classes go in descending
/// original support. While a class's current support is below target, a
/// uniformly drawn original row carrying that label is duplicated, which also
/// raises every other label in the row.
///
/// Throws Error(invalid_argument) for rho outside (0,1] or a class with zero
/// support, and Error(growth_cap_exceeded) when the multiset would exceed
/// growth_cap * N rows.
ResamplePlan oversample_multilabel(const LabelMatrix& matrix, double rho, std::uint64_t seed,
                                   double growth_cap = kDefaultGrowthCap);

/// `plan.json`.
std::string plan_to_json(const ResamplePlan& plan, std::span<const std::string> sample_ids = {});
void write_plan(const std::filesystem::path& path, const ResamplePlan& plan,
                std::span<const std::string> sample_ids = {});

}  // namespace vsa::resample
