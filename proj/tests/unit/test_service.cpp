#include <doctest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "support.hpp"
#include "vsa/core/error.hpp"
#include "vsa/corpus/manifest.hpp"
#include "vsa/service/assignment.hpp"
#include "vsa/service/response_store.hpp"
#include "vsa/service/server.hpp"

using namespace vsa;
using namespace vsa::service;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct FakeClock {
    std::shared_ptr<std::chrono::system_clock::time_point> now =
        std::make_shared<std::chrono::system_clock::time_point>(std::chrono::sys_days{std::chrono::year{2024} / 5 / 1});
    Clock clock() const {
        return [n = now] { return *n; };
    }
    void advance(std::chrono::seconds s) { *now += s; }
};

crowd::RawResponse answers() {
    crowd::RawResponse raw;
    raw.q1 = "7";
    raw.q2 = "3";
    raw.q3_tags = {"joy", "surprise"};
    raw.q4_tags = {"relief"};
    raw.q5_features = {"scene_background"};
    return raw;
}

std::vector<std::string> ids(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("img" + std::to_string(i));
    return out;
}

json body_for(const std::string& token) {
    return {{"assignment_token", token}, {"q1", 6},           {"q2", "5"},
            {"q3_tags", {"joy"}},        {"q4_tags", "anger|fear"}, {"q5_features", json::array({"other"})}};
}

}  // namespace

TEST_SUITE("service") {
    TEST_CASE("assignments prefer the least annotated image") {
        FakeClock clock;
        AssignmentState state(ids(3), {2, std::chrono::minutes(30), "1"}, clock.clock(), 1);
        const auto a = state.next_assignment("w1");
        REQUIRE(a);
        CHECK(a->image_id == "img0");
        CHECK(state.next_assignment("w1")->token == a->token);
        CHECK(state.next_assignment("w2")->image_id == "img1");
        CHECK(state.submit(a->token, answers(), {}).status == SubmitStatus::accepted);
        CHECK(state.next_assignment("w1")->image_id == "img2");
        CHECK(state.progress("img0").completed == 1);
        CHECK(state.progress("img1").in_flight == 1);
        CHECK_THROWS_AS(state.next_assignment(""), Error);
        CHECK_THROWS_AS(state.progress("nope"), Error);
    }

    TEST_CASE("submission outcomes") {
        FakeClock clock;
        AssignmentState state(ids(2), {5, std::chrono::minutes(30), "1"}, clock.clock(), 2);
        CHECK(state.submit("bogus", answers(), {}).status == SubmitStatus::unknown_assignment);

        const auto a = state.next_assignment("w1");
        auto bad = answers();
        bad.q1 = "11";
        const auto invalid = state.submit(a->token, bad, {});
        CHECK(invalid.status == SubmitStatus::invalid);
        CHECK(invalid.errors.size() == 1);
        CHECK(state.progress(a->image_id).in_flight == 1);

        auto wrong_worker = answers();
        wrong_worker.worker_id = "w9";
        CHECK(state.submit(a->token, wrong_worker, {}).status == SubmitStatus::invalid);

        clock.advance(std::chrono::seconds(42));
        std::vector<crowd::CrowdResponse> stored;
        const auto ok = state.submit(a->token, answers(), [&](const auto& r) { stored.push_back(r); });
        REQUIRE(ok.status == SubmitStatus::accepted);
        CHECK(ok.response->elapsed_seconds == 42.0);
        CHECK(ok.response->worker_id == "w1");
        CHECK(ok.response->submitted_at == "2024-05-01T00:00:42Z");
        CHECK(stored.size() == 1);
        CHECK(state.submit(a->token, answers(), {}).status == SubmitStatus::duplicate);

        const auto b = state.next_assignment("w2");
        clock.advance(std::chrono::minutes(31));
        CHECK(state.submit(b->token, answers(), {}).status == SubmitStatus::expired);
        CHECK(state.progress(b->image_id).in_flight == 0);
    }

    TEST_CASE("assignment stops once every image reaches the target") {
        AssignmentState state(ids(2), {2, std::chrono::minutes(30), "1"}, {}, 3);
        for (int w = 0; w < 4; ++w) {
            const auto a = state.next_assignment("w" + std::to_string(w));
            REQUIRE(a);
            CHECK(state.submit(a->token, answers(), {}).status == SubmitStatus::accepted);
        }
        CHECK_FALSE(state.next_assignment("w9"));
        CHECK(state.completed_images() == 2);
        CHECK(state.total_completed() == 4);
    }

    TEST_CASE("a worker never sees an image twice") {
        AssignmentState state(ids(2), {5, std::chrono::minutes(30), "1"}, {}, 4);
        for (int k = 0; k < 2; ++k) {
            const auto a = state.next_assignment("solo");
            REQUIRE(a);
            state.submit(a->token, answers(), {});
        }
        CHECK_FALSE(state.next_assignment("solo"));
    }

    TEST_CASE("response store replays and restores progress") {
        const auto dir = testing::temp_dir("store");
        {
            ResponseStore store(dir / "responses.csv");
            auto rs = testing::random_responses(3, 2, 2);
            for (const auto& r : rs) store.append(r);
            CHECK(store.size() == 4);
        }
        ResponseStore reopened(dir / "responses.csv");
        CHECK(reopened.size() == 4);
        CHECK(reopened.warnings().empty());
        CHECK(reopened.export_csv().rfind("response_id,worker_id", 0) == 0);
        AssignmentState state(ids(3), {2, std::chrono::minutes(30), "1"}, {}, 5);
        auto stored = reopened.snapshot();
        stored.push_back(stored.front());
        stored.back().image_id = "ghost";
        CHECK(state.restore(stored).size() == 1);
        CHECK(state.completed_images() == 2);
        CHECK(state.next_assignment("w0")->image_id == "img2");
    }

    TEST_CASE("http api") {
        const auto dir = testing::temp_dir("http");
        fs::create_directories(dir / "img");
        std::ofstream(dir / "img" / "a b.jpg") << "jpegbytes";
        std::vector<corpus::ImageRecord> records{{"a", "img/a b.jpg", "k", "l", true},
                                                 {"b", "img/b.jpg", "k", "l", true}};
        ServerConfig config;
        config.port = 0;
        config.store_path = dir / "responses.csv";
        config.admin_token = "secret";
        config.assignment.target_responses = 1;
        AnnotationServer server(corpus::Manifest(records, dir), config);
        const int port = server.bind();
        std::thread thread([&] { server.serve(); });
        server.wait_until_ready();
        httplib::Client client("127.0.0.1", port);

        auto health = client.Get("/api/health");
        REQUIRE(health);
        CHECK(json::parse(health->body)["images"] == 2);

        CHECK(client.Get("/api/assignment")->status == 400);
        auto res = client.Get("/api/assignment?worker=w1");
        REQUIRE(res);
        CHECK(res->status == 200);
        const auto assignment = json::parse(res->body);
        CHECK(assignment["image_id"] == "a");
        CHECK(assignment["image_url"] == "/images/img/a%20b.jpg");
        const std::string token = assignment["assignment_token"];

        auto image = client.Get(assignment["image_url"].get<std::string>());
        REQUIRE(image);
        CHECK(image->body == "jpegbytes");

        CHECK(client.Post("/api/response", "{not json", "application/json")->status == 400);
        CHECK(client.Post("/api/response", body_for("nope").dump(), "application/json")->status == 404);
        auto invalid = body_for(token);
        invalid["q1"] = 0;
        invalid["q3_tags"] = json::array({"glee"});
        auto r422 = client.Post("/api/response", invalid.dump(), "application/json");
        CHECK(r422->status == 422);
        CHECK(json::parse(r422->body)["errors"].size() == 2);

        auto good = body_for(token);
        good["client_elapsed_seconds"] = 0.5;
        auto ok = client.Post("/api/response", good.dump(), "application/json");
        REQUIRE(ok);
        CHECK(ok->status == 200);
        CHECK(json::parse(ok->body).contains("elapsed_discrepancy"));
        CHECK(client.Post("/api/response", good.dump(), "application/json")->status == 409);

        CHECK(client.Get("/api/export")->status == 401);
        httplib::Headers headers{{kAdminTokenHeader, "secret"}};
        auto exported = client.Get("/api/export", headers);
        REQUIRE(exported);
        CHECK(exported->status == 200);
        CHECK(exported->body.find(",w1,a,") != std::string::npos);

        CHECK(json::parse(client.Get("/api/assignment?worker=w1")->body)["image_id"] == "b");
        CHECK(json::parse(client.Get("/api/assignment?worker=w2")->body)["done"] == true);

        server.stop();
        thread.join();
        CHECK(server.store().size() == 1);
    }
}
