#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "support.hpp"
#include "vsa/core/error.hpp"
#include "vsa/corpus/label_sets.hpp"
#include "vsa/corpus/manifest.hpp"
#include "vsa/corpus/splits.hpp"

using namespace vsa;
using namespace vsa::corpus;
namespace fs = std::filesystem;

TEST_SUITE("corpus") {
    TEST_CASE("label sets have their canonical tags") {
        CHECK(tag_names(LabelSetId::set1) == std::vector<std::string>{"positive", "negative", "neutral"});
        CHECK(tag_names(LabelSetId::set2) == std::vector<std::string>{"relax", "stimulated", "normal"});
        CHECK(tag_names(LabelSetId::set3) ==
              std::vector<std::string>{"joy", "sadness", "fear", "disgust", "anger", "surprise", "neutral"});
        CHECK(tag_names(LabelSetId::set4) ==
              std::vector<std::string>{"anger", "anxiety", "craving", "empathetic pain", "fear", "horror", "joy",
                                       "relief", "sadness", "surprise"});
        CHECK(tag_index(LabelSetId::set4, " Empathetic Pain ") == 3);
        CHECK_FALSE(tag_index(LabelSetId::set3, "boredom"));
        CHECK(parse_label_set("set3") == LabelSetId::set3);
        CHECK(is_scale_set(LabelSetId::set2));
        CHECK_FALSE(is_scale_set(LabelSetId::set4));
        CHECK(neutral_index(LabelSetId::set1) == 2);
    }

    TEST_CASE("scan, write and load manifest") {
        const auto dir = testing::temp_dir("manifest");
        fs::create_directories(dir / "img" / "flood");
        fs::create_directories(dir / "img" / "fire");
        std::ofstream(dir / "img" / "flood" / "a.jpg") << "x";
        std::ofstream(dir / "img" / "fire" / "b.PNG") << "x";
        std::ofstream(dir / "img" / "fire" / "notes.txt") << "x";
        const auto records = scan_image_directory(dir / "img", "CC-BY");
        REQUIRE(records.size() == 2);
        CHECK(records[0].image_id == "fire_b");
        CHECK(records[0].keyword == "fire");
        CHECK(records[1].relative_path == "flood/a.jpg");

        write_manifest(dir / "img" / "manifest.csv", records);
        const auto m = load_manifest(dir / "img" / "manifest.csv");
        CHECK(m.size() == 2);
        CHECK(m.warnings.empty());
        CHECK(m.find("flood_a") == 1);
        CHECK(fs::exists(m.resolve(m.records()[1])));
    }

    TEST_CASE("manifest rejects duplicates and flags unresolvable paths") {
        const auto dir = testing::temp_dir("manifest_bad");
        std::ofstream(dir / "m.csv") << "image_id,relative_path,keyword,license\na,x.jpg,k,l\na,y.jpg,k,l\n";
        CHECK_THROWS_AS(load_manifest(dir / "m.csv"), Error);
        std::ofstream(dir / "m2.csv") << "image_id,relative_path,keyword,license\na,x.jpg,k,l\n";
        const auto m = load_manifest(dir / "m2.csv");
        CHECK_FALSE(m.records()[0].resolvable);
        CHECK(m.warnings.size() == 1);
        CHECK_THROWS_AS(load_manifest(dir / "none.csv"), Error);
    }

    TEST_CASE("random splits are a deterministic partition") {
        const auto a = make_splits(101, {0.7, 0.1, 0.2}, 7);
        const auto b = make_splits(101, {0.7, 0.1, 0.2}, 7);
        CHECK(a.train == b.train);
        CHECK(a.test == b.test);
        CHECK(a.val.size() == 10);
        CHECK(a.test.size() == 20);
        CHECK(a.train.size() == 71);
        std::vector<std::size_t> all;
        for (const auto* part : {&a.train, &a.val, &a.test}) {
            CHECK(std::is_sorted(part->begin(), part->end()));
            all.insert(all.end(), part->begin(), part->end());
        }
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> expected(101);
        std::iota(expected.begin(), expected.end(), 0);
        CHECK(all == expected);
        CHECK_THROWS_AS(make_splits(10, {0.5, 0.5, 0.5}), Error);
        CHECK_THROWS_AS(make_splits(2), Error);
    }

    TEST_CASE("stratified splits keep class proportions") {
        std::vector<std::size_t> strata;
        for (std::size_t i = 0; i < 100; ++i) strata.push_back(i < 80 ? 0 : 1);
        const auto s = make_stratified_splits(strata, {0.6, 0.2, 0.2}, 3);
        CHECK(s.test.size() == 20);
        CHECK(s.val.size() == 20);
        const auto minority = std::count_if(s.test.begin(), s.test.end(), [&](auto i) { return strata[i] == 1; });
        CHECK(minority == 4);
    }

    TEST_CASE("splits json round-trip") {
        const auto dir = testing::temp_dir("splits");
        std::vector<std::string> ids;
        for (int i = 0; i < 30; ++i) ids.push_back("img" + std::to_string(i));
        const auto s = make_splits(ids.size(), {}, 11);
        write_splits_json(dir / "splits.json", s, ids);
        const auto r = read_splits_json(dir / "splits.json", ids);
        CHECK(r.train == s.train);
        CHECK(r.val == s.val);
        CHECK(r.test == s.test);
        CHECK(r.seed == 11);
        const std::vector<std::string> fewer(ids.begin(), ids.begin() + 5);
        CHECK_THROWS_AS(read_splits_json(dir / "splits.json", fewer), Error);
    }
}
