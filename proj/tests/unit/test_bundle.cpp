#include "doctest.h"

#include "alba/bundle.hpp"
#include "alba/error.hpp"
#include "helpers.hpp"

using namespace alba;

TEST_SUITE("bundle")
{
    TEST_CASE("json round trip preserves every prediction")
    {
        const auto b = testutil::small_bundle();
        const auto dir = testutil::temp_dir("bundle");
        save_bundle(dir / "b.json", *b);
        const auto back = load_bundle(dir / "b.json");
        CHECK(bundle_to_json(back) == bundle_to_json(*b));

        LanguageCohortSpec spec;
        spec.respondents = 270;
        spec.seed = 5;
        const auto c = simulate_language_cohort(spec);
        const auto& m1 = b->models;
        const auto& m2 = back.models;
        for (std::size_t i = 0; i < 30; ++i) {
            const auto& r = c.records[i];
            std::vector<ItemResponse> resp1, resp2;
            ItemScoreVector y1, y2;
            for (const auto& [item, words] : r.responses) {
                const auto e1 = embed_response(b->embedding, words);
                const auto e2 = embed_response(back.embedding, words);
                const double a = m1.item_models.at(item).predict(e1);
                const double z = m2.item_models.at(item).predict(e2);
                CHECK(a == z);
                resp1.push_back({item, m1.thresholds.level(item, a)});
                resp2.push_back({item, m2.thresholds.level(item, z)});
                y1[item] = a;
                y2[item] = z;
            }
            CHECK(resp1 == resp2);
            CHECK(m1.scorer->estimate(resp1).theta == m2.scorer->estimate(resp2).theta);
            CHECK(m1.actor_critic->score(y1) == m2.actor_critic->score(y2));
            CHECK(m1.actor_critic->next({}, std::vector<ItemId>{1, 2, 3}) ==
                  m2.actor_critic->next({}, std::vector<ItemId>{1, 2, 3}));
            Eigen::VectorXd f(11);
            for (int j = 0; j < 11; ++j)
                f(j) = resp1[static_cast<std::size_t>(j)].level;
            CHECK(m1.tree_latent->predict(f) == m2.tree_latent->predict(f));
        }
        CHECK(m1.fixed_orders.forward == m2.fixed_orders.forward);
        CHECK(m1.fixed_orders.backward == m2.fixed_orders.backward);
        CHECK(m1.theta0 == m2.theta0);
    }

    TEST_CASE("missing file and bad json")
    {
        const auto dir = testutil::temp_dir("bundle_bad");
        try {
            load_bundle(dir / "nope.json");
            FAIL("expected BundleNotLoaded");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::BundleNotLoaded);
        }
        testutil::write_file(dir / "bad.json", "{\"version\": 1}");
        CHECK_THROWS(load_bundle(dir / "bad.json"));
    }

    TEST_CASE("fitting ignores row order")
    {
        LanguageCohortSpec spec;
        spec.respondents = 180;
        spec.seed = 6;
        auto c = simulate_language_cohort(spec);
        FitConfig config;
        config.fit_trees = false;
        config.fit_actor_critic = false;
        const auto a = fit_bundle(c.records, c.bank, c.embedding, "phq9", 6, config);
        std::reverse(c.records.begin(), c.records.end());
        const auto b = fit_bundle(c.records, c.bank, c.embedding, "phq9", 6, config);
        CHECK(bundle_to_json(a).dump() == bundle_to_json(b).dump());
    }
}
