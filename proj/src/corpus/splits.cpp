#include "vsa/corpus/splits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "vsa/core/error.hpp"
#include "vsa/core/rng.hpp"

namespace vsa::corpus {
namespace {

void check_ratios(const SplitRatios& r) {
    if (r.train < 0 || r.val < 0 || r.test < 0) {
        throw Error(ErrorKind::invalid_argument, "split ratios must be non-negative");
    }
    if (std::abs(r.train + r.val + r.test - 1.0) > 1e-9) {
        throw Error(ErrorKind::invalid_argument, "split ratios must sum to 1");
    }
}

// floor(n * ratio); the epsilon keeps e.g. 0.29 * 100 from flooring to 28.
std::size_t floor_share(std::size_t n, double ratio) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio + 1e-9));
}

// Apportions `total` across groups proportionally to `weights`, never
// exceeding `capacity`; leftover seats go to the largest remainders,
// ties to the lower group index.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<std::size_t>& weights,
                                   const std::vector<std::size_t>& capacity) {
    const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> seats(weights.size(), 0);
    std::vector<double> remainder(weights.size(), 0.0);
    std::size_t assigned = 0;
    for (std::size_t g = 0; g < weights.size(); ++g) {
        const double quota = weight_sum > 0 ? total * (weights[g] / weight_sum) : 0.0;
        seats[g] = std::min(capacity[g], static_cast<std::size_t>(std::floor(quota + 1e-9)));
        remainder[g] = quota - static_cast<double>(seats[g]);
        assigned += seats[g];
    }
    while (assigned < total) {
        std::size_t best = weights.size();
        for (std::size_t g = 0; g < weights.size(); ++g) {
            if (seats[g] >= capacity[g]) continue;
            if (best == weights.size() || remainder[g] > remainder[best] + 1e-12) best = g;
        }
        if (best == weights.size()) {
            throw Error(ErrorKind::invalid_argument, "cannot apportion split: not enough samples");
        }
        ++seats[best];
        remainder[best] -= 1.0;
        ++assigned;
    }
    return seats;
}

}  // namespace

SplitAssignment make_splits(std::size_t n, SplitRatios ratios, std::uint64_t seed) {
    const std::vector<std::size_t> strata(n, 0);
    return make_stratified_splits(strata, ratios, seed);
}

SplitAssignment make_stratified_splits(std::span<const std::size_t> strata, SplitRatios ratios,
                                       std::uint64_t seed) {
    check_ratios(ratios);
    const std::size_t n = strata.size();
    if (n < 3) {
        throw Error(ErrorKind::invalid_argument,
                    "need at least 3 samples to split, got " + std::to_string(n));
    }
    const std::size_t val_total = floor_share(n, ratios.val);
    const std::size_t test_total = floor_share(n, ratios.test);

    // Groups in ascending stratum order for determinism.
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[strata[i]].push_back(i);

    std::vector<std::vector<std::size_t>> members;
    std::vector<std::size_t> sizes;
    for (auto& [stratum, idx] : groups) {
        members.push_back(std::move(idx));
        sizes.push_back(members.back().size());
    }

    const auto val_seats = apportion(val_total, sizes, sizes);
    std::vector<std::size_t> room(sizes.size());
    for (std::size_t g = 0; g < sizes.size(); ++g) room[g] = sizes[g] - val_seats[g];
    const auto test_seats = apportion(test_total, sizes, room);

    SplitAssignment out;
    out.seed = seed;
    out.ratios = ratios;
    Rng rng(seed);
    for (std::size_t g = 0; g < members.size(); ++g) {
        auto& idx = members[g];
        rng.shuffle(std::span<std::size_t>(idx));
        auto it = idx.begin();
        out.val.insert(out.val.end(), it, it + static_cast<std::ptrdiff_t>(val_seats[g]));
        it += static_cast<std::ptrdiff_t>(val_seats[g]);
        out.test.insert(out.test.end(), it, it + static_cast<std::ptrdiff_t>(test_seats[g]));
        it += static_cast<std::ptrdiff_t>(test_seats[g]);
        out.train.insert(out.train.end(), it, idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

void write_splits_json(const std::filesystem::path& path, const SplitAssignment& splits,
                       std::span<const std::string> sample_ids) {
    auto ids = [&](const std::vector<std::size_t>& idx) {
        nlohmann::json arr = nlohmann::json::array();
        for (auto i : idx) {
            if (i >= sample_ids.size()) throw Error(ErrorKind::out_of_range, "split index out of range");
            arr.push_back(sample_ids[i]);
        }
        return arr;
    };
    nlohmann::ordered_json doc;
    doc["seed"] = splits.seed;
    doc["ratios"] = {splits.ratios.train, splits.ratios.val, splits.ratios.test};
    doc["train"] = ids(splits.train);
    doc["val"] = ids(splits.val);
    doc["test"] = ids(splits.test);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::not_found, "cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

SplitAssignment read_splits_json(const std::filesystem::path& path,
                                 std::span<const std::string> sample_ids) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::not_found, "splits file '" + path.string() + "' not found");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, "'" + path.string() + "': " + e.what());
    }
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < sample_ids.size(); ++i) position.emplace(sample_ids[i], i);

    SplitAssignment out;
    try {
        out.seed = doc.at("seed").get<std::uint64_t>();
        const auto& r = doc.at("ratios");
        out.ratios = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
        auto load = [&](const char* key, std::vector<std::size_t>& dst) {
            for (const auto& id : doc.at(key)) {
                const auto name = id.get<std::string>();
                const auto it = position.find(name);
                if (it == position.end()) {
                    throw Error(ErrorKind::not_found,
                                "split '" + std::string(key) + "' references unknown id '" + name + "'");
                }
                dst.push_back(it->second);
            }
            std::sort(dst.begin(), dst.end());
        };
        load("train", out.train);
        load("val", out.val);
        load("test", out.test);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, "'" + path.string() + "': " + e.what());
    }
    return out;
}

}  // namespace vsa::corpus
