#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "helpers.hpp"

#include "alba/data_model.hpp"
#include "alba/error.hpp"

using namespace alba;

TEST_SUITE("data_model")
{
    TEST_CASE("single csv row parses into one record with three words")
    {
        const auto dir = testutil::temp_dir("dm_one");
        const auto f = testutil::write_file(dir / "r.csv", "respondent_id,item_id,words\np1,1,\"Sad tired  HOPELESS.\"\n");
        const auto recs = load_responses(f, ResponseFormat::Csv, ItemBank::default_bank());
        REQUIRE(recs.size() == 1);
        CHECK(recs[0].respondent_id == "p1");
        REQUIRE(recs[0].responses.count(1) == 1);
        CHECK(recs[0].responses.at(1) == std::vector<std::string>{"sad", "tired", "hopeless"});
    }

    TEST_CASE("unknown item, duplicate pair, malformed row, empty file")
    {
        const auto dir = testutil::temp_dir("dm_err");
        const auto bank = ItemBank::default_bank();
        auto code_of = [&](const std::string& body) {
            const auto f = testutil::write_file(dir / "r.csv", body);
            try {
                load_responses(f, ResponseFormat::Csv, bank);
            } catch (const Error& e) {
                return e.code();
            }
            return Errc::Io;
        };
        CHECK(code_of("respondent_id,item_id,words\np1,99,\"a b\"\n") == Errc::UnknownItemId);
        CHECK(code_of("respondent_id,item_id,words\np1,1,\"a\"\np1,1,\"b\"\n") == Errc::DuplicateRespondent);
        CHECK(code_of("respondent_id,item_id,words\np1,x,\"a\"\n") == Errc::MalformedRow);
        try {
            load_responses(testutil::write_file(dir / "m.csv", "respondent_id,item_id,words\np1,1,\"a\"\np2\n"),
                           ResponseFormat::Csv, bank);
            FAIL("expected MalformedRow");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("m.csv:3:") != std::string::npos);
        }
        const auto empty = testutil::write_file(dir / "e.csv", "");
        CHECK(load_responses(empty, ResponseFormat::Csv, bank).empty());
    }

    TEST_CASE("tokenize lowercases and strips edge punctuation")
    {
        CHECK(tokenize("  Hello, WORLD!  it's -- fine ") ==
              std::vector<std::string>{"hello", "world", "it's", "fine"});
    }

    TEST_CASE("csv and jsonl round trip")
    {
        const auto dir = testutil::temp_dir("dm_rt");
        std::vector<RespondentRecord> recs(2);
        recs[0].respondent_id = "a,1";
        recs[0].responses = {{1, {"calm", "ok"}}, {3, {"fine"}}};
        recs[0].measures = {{"phq9", 4.5}, {"gad7", 2.0}};
        recs[1].respondent_id = "b\"2";
        recs[1].responses = {{2, {"tired"}}};
        recs[1].measures = {{"phq9", 0.1}, {"gad7", 21.0}};
        const auto bank = ItemBank::default_bank();
        for (auto fmt : {ResponseFormat::Csv, ResponseFormat::Jsonl}) {
            const auto path = dir / (fmt == ResponseFormat::Csv ? "r.csv" : "r.jsonl");
            save_responses(path, fmt, recs);
            auto back = load_responses(path, fmt, bank);
            if (fmt == ResponseFormat::Csv) {
                save_measures(dir / "m.csv", recs);
                load_measures(dir / "m.csv", back);
            }
            CHECK(back == recs);
        }
    }

    TEST_CASE("item bank json round trip and contiguity")
    {
        const auto dir = testutil::temp_dir("dm_bank");
        const auto bank = ItemBank::default_bank();
        CHECK(bank.size() == 11);
        bank.save(dir / "b.json");
        const auto back = ItemBank::load(dir / "b.json");
        REQUIRE(back.size() == 11);
        CHECK(back.at(7).shorthand == bank.at(7).shorthand);
        CHECK_THROWS_AS(ItemBank({{1, "a", "a", 1}, {3, "b", "b", 1}}), Error);
        CHECK_THROWS_AS(ItemBank({{1, "a", "a", 1}}), Error);
    }

    TEST_CASE("validate_records under both missing policies")
    {
        const auto bank = ItemBank({{1, "q1", "a", 1}, {2, "q2", "b", 1}});
        RespondentRecord r{"p", {{1, {"x"}}}, {{"phq9", 3}}};
        std::vector<RespondentRecord> recs{r};
        CHECK_THROWS_AS(validate_records(recs, bank, "phq9", MissingPolicy::Reject), Error);
        CHECK_NOTHROW(validate_records(recs, bank, "phq9", MissingPolicy::DropItem));
    }

    std::vector<std::string> ids(int n)
    {
        std::vector<std::string> out;
        for (int i = 0; i < n; ++i)
            out.push_back("resp-" + std::to_string(i));
        return out;
    }

    TEST_CASE("nine respondents give nine singleton folds")
    {
        const auto plan = make_splits(ids(9), 7);
        for (auto s : plan.fold_sizes)
            CHECK(s == 1);
        CHECK_THROWS_AS(make_splits(ids(8), 7), Error);
    }

    TEST_CASE("947 respondents give folds of 105 or 106")
    {
        // oracle: 947 = 9 * 105 + 2, so two folds carry one extra respondent
        const int n = 947, base = n / 9, extra = n % 9;
        const auto plan = make_splits(ids(n), 3);
        int big = 0;
        for (auto s : plan.fold_sizes) {
            CHECK((s == static_cast<std::size_t>(base) || s == static_cast<std::size_t>(base + 1)));
            big += s == static_cast<std::size_t>(base + 1);
        }
        CHECK(big == extra);
    }

    TEST_CASE("splits are deterministic, order invariant, and partition every rotation")
    {
        auto v = ids(100);
        const auto a = make_splits(v, 11);
        std::reverse(v.begin(), v.end());
        const auto b = make_splits(v, 11);
        for (const auto& id : v)
            CHECK(a.fold(id) == b.fold(id));
        const auto c = make_splits(v, 12);
        int moved = 0;
        for (const auto& id : v)
            moved += a.fold(id) != c.fold(id);
        CHECK(moved > 0);

        std::set<int> tests;
        for (const auto& rot : a.rotations) {
            std::set<int> all;
            for (int f : rot.poly_folds)
                all.insert(f);
            for (int f : rot.train_folds)
                all.insert(f);
            all.insert(rot.test_fold);
            CHECK(all.size() == 9);
            tests.insert(rot.test_fold);
            for (int f = 0; f < 9; ++f)
                CHECK(int(rot.is_poly(f)) + int(rot.is_train(f)) + int(rot.test_fold == f) == 1);
        }
        CHECK(tests.size() == 9);
    }
}
