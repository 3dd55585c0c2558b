#include <atomic>
#include <chrono>
#include <thread>

#include "doctest.h"

#include "alba/error.hpp"
#include "alba/service.hpp"
#include "alba/session.hpp"
#include "helpers.hpp"

#include "httplib.h"

using namespace alba;
using nlohmann::json;

namespace {

struct Fixture {
    std::shared_ptr<const ModelBundle> bundle = testutil::small_bundle();
    LanguageCohort cohort = [] {
        LanguageCohortSpec spec;
        spec.respondents = 270;
        spec.seed = 5;
        return simulate_language_cohort(spec);
    }();

    const std::vector<std::string>& words(std::size_t respondent, ItemId item) const
    {
        return cohort.records[respondent].responses.at(item);
    }
};

const Fixture& fixture()
{
    static const Fixture f;
    return f;
}

json answer(const Fixture& f, std::size_t respondent, ItemId item)
{
    return {{"item_id", item}, {"words", f.words(respondent, item)}};
}

// Runs a whole session through the service and returns the final response.
json run_session(AssessmentService& svc, const Fixture& f, std::size_t respondent, const json& create)
{
    auto c = svc.create_session(create);
    REQUIRE(c.status == 201);
    const auto id = c.body["session_id"].get<std::string>();
    json q = c.body["question"];
    json last;
    while (!q.is_null()) {
        auto r = svc.submit_response(id, answer(f, respondent, q["item_id"].get<ItemId>()));
        REQUIRE(r.status == 200);
        last = r.body;
        q = r.body["question"];
    }
    return last;
}

} // namespace

TEST_SUITE("service")
{
    TEST_CASE("error codes map to http statuses")
    {
        CHECK(http_status(Errc::SessionNotFound) == 404);
        CHECK(http_status(Errc::SessionDone) == 409);
        CHECK(http_status(Errc::WrongItem) == 409);
        CHECK(http_status(Errc::AllWordsOutOfVocabulary) == 422);
        CHECK(http_status(Errc::BundleNotLoaded) == 503);
        CHECK(http_status(Errc::UnknownStrategy) == 400);
        const auto r = error_response(Error(Errc::WrongItem, "x"));
        CHECK(r.body["code"] == "wrong_item");
    }

    TEST_CASE("alirt sessions start deterministically")
    {
        const auto& f = fixture();
        AssessmentService svc(f.bundle);
        const auto a = svc.create_session({{"strategy", "alirt"}});
        const auto b = svc.create_session({{"strategy", "alirt"}});
        REQUIRE(a.status == 201);
        CHECK(a.body["question"]["item_id"] == b.body["question"]["item_id"]);
        CHECK(a.body["session_id"] != b.body["session_id"]);
        const auto want = alirt_next(f.bundle->models.grm(),
                                     SessionState::start(f.bundle->bank.ids(), Strategy::Alirt, Scoring::Latent,
                                                         f.bundle->models.theta0));
        CHECK(a.body["question"]["item_id"] == want);
        CHECK(svc.session_count() == 2);
    }

    TEST_CASE("bad requests")
    {
        const auto& f = fixture();
        AssessmentService svc(f.bundle);
        auto r = svc.create_session({{"strategy", "greedy"}});
        CHECK(r.status == 400);
        CHECK(r.body["code"] == "unknown_strategy");
        CHECK(svc.create_session({{"scoring", "regr_x"}}).status == 400);
        CHECK(svc.create_session(json::array()).status == 400);
        CHECK(svc.submit_response("missing", {{"item_id", 1}, {"words", {"a"}}}).status == 404);
        CHECK(svc.get_session("missing").status == 404);

        auto c = svc.create_session({});
        const auto id = c.body["session_id"].get<std::string>();
        const ItemId first = c.body["question"]["item_id"];
        const ItemId other = first == 1 ? 2 : 1;
        CHECK(svc.submit_response(id, answer(f, 0, other)).status == 409);
        CHECK(svc.submit_response(id, {{"item_id", first}, {"words", json::array()}}).status == 400);
        CHECK(svc.submit_response(id, {{"item_id", first}, {"words", {"zzzunknownzzz"}}}).status == 422);
        CHECK(svc.submit_response(id, {{"item_id", first}}).status == 400);
        // nothing was recorded by the failures
        CHECK(svc.get_session(id).body["administered"].empty());
        CHECK(svc.submit_response(id, answer(f, 0, first)).status == 200);
    }

    TEST_CASE("a full session equals the batch estimate")
    {
        const auto& f = fixture();
        AssessmentService svc(f.bundle);
        const auto& m = f.bundle->models;
        for (std::size_t i : {0u, 7u, 42u}) {
            const auto last = run_session(svc, f, i, {{"max_items", 11}});
            CHECK(last["done"] == true);
            CHECK(last["step"] == 11);
            std::vector<ItemResponse> all;
            for (ItemId id = 1; id <= 11; ++id) {
                const double y = m.item_models.at(id).predict(embed_response(f.bundle->embedding, f.words(i, id)));
                all.push_back({id, m.thresholds.level(id, y)});
            }
            CHECK(last["estimates"]["theta"].get<double>() == m.scorer->estimate(all).theta);
        }
    }

    TEST_CASE("completed sessions refuse further answers")
    {
        const auto& f = fixture();
        AssessmentService svc(f.bundle);
        auto c = svc.create_session({{"max_items", 2}});
        const auto id = c.body["session_id"].get<std::string>();
        ItemId q = c.body["question"]["item_id"];
        auto r = svc.submit_response(id, answer(f, 3, q));
        CHECK(r.body["done"] == false);
        q = r.body["question"]["item_id"];
        r = svc.submit_response(id, answer(f, 3, q));
        CHECK(r.body["done"] == true);
        CHECK(r.body["question"].is_null());
        const auto again = svc.submit_response(id, answer(f, 3, 1));
        CHECK(again.status == 409);
        CHECK(again.body["code"] == "session_done");
        const auto snap = svc.get_session(id).body;
        CHECK(snap["trajectory"].size() == 2);
        CHECK(snap["administered"].size() == 2);
        CHECK(snap["done"] == true);
    }

    TEST_CASE("both scorings are reported")
    {
        const auto& f = fixture();
        AssessmentService svc(f.bundle);
        const auto last = run_session(svc, f, 5, {{"scoring", "both"}, {"max_items", 3}});
        CHECK(last["estimates"].contains("theta"));
        CHECK(last["estimates"].contains("yhat"));
        const auto yhat = run_session(svc, f, 5, {{"scoring", "yhat"}, {"max_items", 3}});
        CHECK(yhat["estimates"].contains("yhat"));
        CHECK_FALSE(yhat["estimates"].contains("theta"));
    }

    TEST_CASE("every strategy runs to completion")
    {
        const auto& f = fixture();
        AssessmentService svc(f.bundle);
        for (auto s : kAllStrategies) {
            const auto last = run_session(svc, f, 9, {{"strategy", strategy_name(s)}, {"max_items", 4}, {"seed", 3}});
            CHECK(last["step"] == 4);
        }
        const auto a = run_session(svc, f, 9, {{"strategy", "random"}, {"max_items", 11}, {"seed", 3}});
        const auto b = run_session(svc, f, 9, {{"strategy", "random"}, {"max_items", 11}, {"seed", 3}});
        CHECK(a == b);
    }

    TEST_CASE("concurrent sessions are independent")
    {
        const auto& f = fixture();
        AssessmentService svc(f.bundle);
        const auto serial = run_session(svc, f, 11, {{"max_items", 6}});
        std::vector<std::thread> threads;
        std::atomic<int> matches{0};
        for (int t = 0; t < 8; ++t)
            threads.emplace_back([&] {
                if (run_session(svc, f, 11, {{"max_items", 6}}) == serial)
                    ++matches;
            });
        for (auto& t : threads)
            t.join();
        CHECK(matches == 8);
    }

    TEST_CASE("idle sessions expire")
    {
        const auto& f = fixture();
        auto now = std::chrono::steady_clock::time_point{};
        ServiceOptions opts;
        opts.session_ttl = std::chrono::seconds(60);
        opts.clock = [&] { return now; };
        AssessmentService svc(f.bundle, opts);
        const auto a = svc.create_session({}).body["session_id"].get<std::string>();
        now += std::chrono::seconds(40);
        const auto b = svc.create_session({}).body["session_id"].get<std::string>();
        now += std::chrono::seconds(30);
        CHECK(svc.expire_idle() == 1);
        CHECK(svc.get_session(a).status == 404);
        CHECK(svc.get_session(b).status == 200);
    }

    TEST_CASE("transcripts replay exactly")
    {
        const auto& f = fixture();
        const auto dir = testutil::temp_dir("transcripts");
        ServiceOptions opts;
        opts.transcript_dir = dir;
        AssessmentService svc(f.bundle, opts);
        for (auto s : {"alirt", "actor_critic", "tree"}) {
            auto c = svc.create_session({{"strategy", s}, {"scoring", "both"}, {"max_items", 6}});
            const auto id = c.body["session_id"].get<std::string>();
            ItemId q = c.body["question"]["item_id"];
            for (int k = 0; k < 6; ++k) {
                auto r = svc.submit_response(id, answer(f, 20, q));
                if (r.body["question"].is_null())
                    break;
                q = r.body["question"]["item_id"];
            }
            const auto res = replay_transcript(f.bundle, dir / (id + ".jsonl"));
            CHECK(res.steps == 6);
            CHECK(res.items_match);
            CHECK(res.max_theta_diff <= 1e-9);
            CHECK(res.max_yhat_diff <= 1e-9);
        }
    }

    TEST_CASE("http round trip")
    {
        const auto& f = fixture();
        AssessmentService svc(f.bundle);
        httplib::Server server;
        svc.mount(server);
        const int port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        std::thread th([&] { server.listen_after_bind(); });
        server.wait_until_ready();
        httplib::Client client("127.0.0.1", port);
        auto h = client.Get("/api/health");
        REQUIRE(h);
        CHECK(h->status == 200);
        CHECK(json::parse(h->body)["items"] == 11);
        auto items = client.Get("/api/items");
        REQUIRE(items);
        CHECK(json::parse(items->body).size() == 11);
        auto c = client.Post("/api/sessions", R"({"max_items": 2})", "application/json");
        REQUIRE(c);
        CHECK(c->status == 201);
        const auto created = json::parse(c->body);
        const auto id = created["session_id"].get<std::string>();
        const ItemId q = created["question"]["item_id"];
        auto r = client.Post("/api/sessions/" + id + "/responses", answer(f, 1, q).dump(), "application/json");
        REQUIRE(r);
        CHECK(r->status == 200);
        auto bad = client.Post("/api/sessions/" + id + "/responses", "not json", "application/json");
        REQUIRE(bad);
        CHECK(bad->status == 400);
        auto g = client.Get("/api/sessions/" + id);
        REQUIRE(g);
        CHECK(json::parse(g->body)["administered"].size() == 1);
        auto missing = client.Get("/api/sessions/nope");
        REQUIRE(missing);
        CHECK(missing->status == 404);
        server.stop();
        th.join();
    }
}
