#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace vsa::corpus {

struct SplitRatios {
    double train = 0.7;
    double val = 0.1;
    double test = 0.2;
};

/// Train/validation/test partition of {0..N-1}. Each list is sorted.
struct SplitAssignment {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;
    SplitRatios ratios;

    std::size_t total() const { return train.size() + val.size() + test.size(); }
};

/// Random split: val and test receive floor(n * ratio) indices, the
/// remainder goes to train. Deterministic for fixed (n, ratios, seed).
///
/// Throws Error(invalid_argument) when ratios are negative or do not sum to
/// 1 within 1e-9, or when n < 3.
SplitAssignment make_splits(std::size_t n, SplitRatios ratios = {}, std::uint64_t seed = 0);

/// Stratified split over per-sample strata (class indices). Global split
/// sizes are the same as in make_splits; each stratum receives a share of
/// val and test by largest-remainder apportionment.
SplitAssignment make_stratified_splits(std::span<const std::size_t> strata, SplitRatios ratios = {},
                                       std::uint64_t seed = 0);

/// `splits.json`: seed, ratios and the three splits as image id arrays.
void write_splits_json(const std::filesystem::path& path, const SplitAssignment& splits,
                       std::span<const std::string> sample_ids);

/// Reads `splits.json`, mapping image ids back to positions in `sample_ids`.
/// Throws Error(not_found) for an id not present in `sample_ids`.
SplitAssignment read_splits_json(const std::filesystem::path& path,
                                 std::span<const std::string> sample_ids);

}  // namespace vsa::corpus
