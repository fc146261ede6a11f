#include <doctest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"
#include "vsa/core/error.hpp"
#include "vsa/crowd/aggregate.hpp"
#include "vsa/crowd/label_io.hpp"
#include "vsa/crowd/response.hpp"
#include "vsa/crowd/stats.hpp"

using namespace vsa;
using namespace vsa::crowd;
using corpus::LabelSetId;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<CrowdResponse> with_tags(const std::vector<std::vector<std::size_t>>& q3) {
    auto rs = testing::random_responses(5, 1, q3.size());
    for (std::size_t i = 0; i < q3.size(); ++i) rs[i].q3_tags = q3[i];
    return rs;
}

}  // namespace

TEST_SUITE("crowd") {
    TEST_CASE("scale buckets") {
        CHECK(map_scale_to_class(1, LabelSetId::set1) == 1);
        CHECK(map_scale_to_class(4, LabelSetId::set1) == 1);
        CHECK(map_scale_to_class(5, LabelSetId::set1) == 2);
        CHECK(map_scale_to_class(6, LabelSetId::set1) == 0);
        CHECK(map_scale_to_class(10, LabelSetId::set2) == 1);
        CHECK_THROWS_AS(map_scale_to_class(0, LabelSetId::set1), Error);
        CHECK_THROWS_AS(map_scale_to_class(11, LabelSetId::set1), Error);
        CHECK_THROWS_AS(map_scale_to_class(5, LabelSetId::set3), Error);
    }

    TEST_CASE("scale ties prefer the neutral class") {
        const std::vector<int> tie_with_neutral{1, 2, 5, 5, 8};
        CHECK(aggregate_scale(tie_with_neutral, LabelSetId::set1) == 2);
        const std::vector<int> tie_without_neutral{1, 2, 7, 8, 5};
        CHECK(aggregate_scale(tie_without_neutral, LabelSetId::set1) == 0);
        const std::vector<int> clear{9, 9, 9, 1, 5};
        CHECK(aggregate_scale(clear, LabelSetId::set1) == 0);
    }

    TEST_CASE("tag majority and fallback") {
        const auto majority = with_tags({{0, 1}, {0}, {0, 2}, {1}, {1, 3}});
        CHECK(aggregate_tagset(majority, LabelSetId::set3) == std::vector<std::size_t>{0, 1});
        const auto none = with_tags({{0}, {1}, {2}, {2}, {3}});
        CHECK(aggregate_tagset(none, LabelSetId::set3) == std::vector<std::size_t>{2});
        const auto tied = with_tags({{4}, {1}, {1}, {4}, {5}});
        CHECK(aggregate_tagset(tied, LabelSetId::set3) == std::vector<std::size_t>{1});
        bool fallback = false;
        const std::vector<std::size_t> counts{3, 0, 2};
        CHECK(majority_tags(counts, 5, &fallback) == std::vector<std::size_t>{0});
        CHECK_FALSE(fallback);
        CHECK_THROWS_AS(aggregate_tagset(std::span(majority).first(4), LabelSetId::set3), Error);
    }

    TEST_CASE("aggregation matches the brute-force rules") {
        const auto rs = testing::random_responses(99, 200, 5);
        const auto result = aggregate_all(rs);
        REQUIRE(result.annotations.size() == 200);
        for (const auto& a : result.annotations) {
            std::vector<int> q1, q2;
            std::vector<std::vector<std::size_t>> q3, q4;
            for (const auto& r : rs) {
                if (r.image_id != a.image_id) continue;
                q1.push_back(r.q1);
                q2.push_back(r.q2);
                q3.push_back(r.q3_tags);
                q4.push_back(r.q4_tags);
            }
            CHECK(corpus::tag_names(LabelSetId::set1)[a.set1_label] == testing::oracle_scale(q1, true));
            CHECK(corpus::tag_names(LabelSetId::set2)[a.set2_label] == testing::oracle_scale(q2, false));
            CHECK(a.set3_labels == testing::oracle_tagset(q3, 7));
            CHECK(a.set4_labels == testing::oracle_tagset(q4, 10));
        }
        auto shuffled = rs;
        Rng rng(3);
        rng.shuffle(std::span(shuffled));
        CHECK(aggregate_all(shuffled).annotations == result.annotations);
    }

    TEST_CASE("images below the annotator minimum are not finalized") {
        auto rs = testing::random_responses(1, 2, 5);
        rs.pop_back();
        const auto result = aggregate_all(rs);
        CHECK(result.unfinalized == std::vector<std::string>{"img1"});
        REQUIRE(result.annotations.size() == 1);
        CHECK(result.annotations[0].image_id == "img0");
    }

    TEST_CASE("export, ingest and re-export are byte-identical") {
        const auto dir = testing::temp_dir("responses");
        auto rs = testing::random_responses(17, 20, 5);
        rs[3].q3_other = "worried, \"very\"";
        write_responses(dir / "a.csv", rs);
        const auto ingested = ingest_responses(dir / "a.csv");
        CHECK(ingested.rejected.empty());
        CHECK(ingested.responses == rs);
        write_responses(dir / "b.csv", ingested.responses);
        CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    }

    TEST_CASE("ingest rejects bad rows with diagnostics") {
        const auto dir = testing::temp_dir("responses_bad");
        auto rs = testing::random_responses(4, 1, 2);
        std::ofstream out(dir / "r.csv");
        write_responses(out, rs);
        out << response_row(rs[0]) << '\n';  // duplicate worker/image
        auto bad = rs[1];
        bad.response_id = "zz";
        bad.worker_id = "other";
        out << response_row(bad) << '\n';
        out << "x,w9,img0,3.0,11,5,joy,,anger,,,2024-01-01T00:00:00Z\n";
        out << "y,w8,img0,3.0,5,5,glee,,anger,,,2024-01-01T00:00:00Z\n";
        out.close();
        const auto result = ingest_responses(dir / "r.csv");
        CHECK(result.responses.size() == 3);
        CHECK(result.rejected.size() == 3);
        std::ofstream(dir / "h.csv") << "wrong,header\n";
        CHECK_THROWS_AS(ingest_responses(dir / "h.csv"), Error);
        CHECK_THROWS_AS(ingest_responses(dir / "missing.csv"), Error);
    }

    TEST_CASE("parse_response reports field errors") {
        RawResponse raw;
        raw.response_id = "r";
        raw.worker_id = "w";
        raw.image_id = "i";
        raw.elapsed_seconds = "abc";
        raw.q1 = "0";
        raw.q2 = "5";
        raw.q3_tags = {"joy"};
        raw.q4_tags = {};
        raw.submitted_at = "2024-01-01T00:00:00Z";
        std::vector<FieldError> errors;
        CHECK_FALSE(parse_response(raw, errors));
        std::set<std::string> fields;
        for (const auto& e : errors) fields.insert(e.field);
        CHECK(fields.count("elapsed_seconds"));
        CHECK(fields.count("q1"));
        CHECK(fields.count("q4_tags"));
    }

    TEST_CASE("quality filter drops fast responses") {
        auto rs = testing::random_responses(2, 1, 3);
        rs[0].elapsed_seconds = 4.0;
        rs[1].elapsed_seconds = 10.0;
        rs[2].elapsed_seconds = 12.0;
        const auto f = filter_responses(rs, kDefaultMinElapsedSeconds);
        CHECK(f.removed == 1);
        CHECK(f.kept.size() == 2);
    }

    TEST_CASE("co-occurrence counts and ordering") {
        const std::vector<std::vector<std::size_t>> sets{{0, 1, 2}, {0, 1}, {1, 2}, {3}};
        const auto pairs = cooccurrence(sets, 2);
        REQUIRE(pairs.size() == 3);
        CHECK(pairs[0] == TagCombination{{0, 1}, 2});
        CHECK(pairs[1] == TagCombination{{1, 2}, 2});
        CHECK(pairs[2] == TagCombination{{0, 2}, 1});
        const auto triples = cooccurrence(sets, 3);
        REQUIRE(triples.size() == 1);
        CHECK(triples[0].count == 1);
        CHECK_THROWS_AS(cooccurrence(sets, 4), Error);
    }

    TEST_CASE("question distributions") {
        auto rs = testing::random_responses(8, 1, 4);
        rs[0].q1 = rs[1].q1 = rs[2].q1 = 3;
        rs[3].q1 = 10;
        const auto d = question_distribution(rs, Question::q1);
        REQUIRE(d.size() == 10);
        CHECK(d[2].count == 3);
        CHECK(d[2].percent == doctest::Approx(75.0));
        CHECK(d[9].count == 1);
        const auto q5 = question_distribution(rs, Question::q5);
        CHECK(q5.size() == 5);
        CHECK_THROWS_AS(question_distribution(std::span<const CrowdResponse>(), Question::q1), Error);
    }

    TEST_CASE("label files round-trip") {
        const auto dir = testing::temp_dir("labels");
        const auto rs = testing::random_responses(21, 12, 5);
        auto result = aggregate_all(rs);
        result.annotations[0].annotator_count = 3;
        const auto exported = export_label_sets(result.annotations, dir);
        CHECK(exported.files.size() == 4);
        CHECK(exported.excluded == std::vector<std::string>{result.annotations[0].image_id});
        const auto set1 = read_label_file(dir / label_file_name(LabelSetId::set1));
        CHECK(set1.rows() == 11);
        CHECK(set1.is_single_label());
        CHECK(set1.single_labels()[0] == result.annotations[1].set1_label);
        const auto set4 = read_label_file(dir / label_file_name(LabelSetId::set4));
        CHECK(set4.cols() == 10);
        for (auto t : result.annotations[1].set4_labels) CHECK(set4.at(0, t) == 1);
        CHECK(detect_label_set(dir / label_file_name(LabelSetId::set3)) == LabelSetId::set3);
        CHECK(detect_label_set(dir / label_file_name(LabelSetId::set2)) == LabelSetId::set2);
    }
}
