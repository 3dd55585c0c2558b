#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"

#include "alba/error.hpp"
#include "alba/strategies.hpp"
#include "alba/synthetic.hpp"
#include "helpers.hpp"

using namespace alba;
using testutil::model_from;

namespace {

std::vector<ItemId> ids(int n)
{
    std::vector<ItemId> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1);
    return v;
}

double grid_map(const GrmModel& m, const std::vector<ItemResponse>& r)
{
    double best = 0.0, best_v = -1e300;
    for (long i = 0; i <= 120000; ++i) {
        const double t = -6.0 + static_cast<double>(i) * 1e-4;
        const double v = log_posterior(m, r, t);
        if (v > best_v) {
            best_v = v;
            best = t;
        }
    }
    return best;
}

void push(SessionState& s, ItemId item, int level, double yhat)
{
    s.administered.push_back(item);
    s.responses.push_back({item, level});
    s.yhat_history.push_back(yhat);
    s.remaining.erase(std::find(s.remaining.begin(), s.remaining.end(), item));
}

} // namespace

TEST_SUITE("strategies")
{
    TEST_CASE("names round trip")
    {
        for (auto s : kAllStrategies)
            CHECK(parse_strategy(strategy_name(s)) == s);
        for (auto s : kAllScorings)
            CHECK(parse_scoring(scoring_name(s)) == s);
        CHECK_THROWS_AS(parse_strategy("greedy"), Error);
        CHECK_THROWS_AS(parse_scoring("sum"), Error);
    }

    TEST_CASE("alirt picks the most discriminating item at the same location")
    {
        const auto m = model_from({GrmItemParams{2.0, {-1, 0, 1}}, GrmItemParams{0.5, {-1, 0, 1}}});
        auto s = SessionState::start(ids(2), Strategy::Alirt, Scoring::Latent);
        CHECK(alirt_next(m, s) == 1);
        const auto flipped = model_from({GrmItemParams{0.5, {-1, 0, 1}}, GrmItemParams{2.0, {-1, 0, 1}}});
        CHECK(alirt_next(flipped, s) == 2);
        const auto same = model_from({GrmItemParams{1.0, {0}}, GrmItemParams{1.0, {0}}});
        CHECK(alirt_next(same, s) == 1);
        s.remaining.clear();
        CHECK_THROWS_AS(alirt_next(m, s), Error);
    }

    TEST_CASE("alirt follows the current estimate")
    {
        // item 1 peaks at -2, item 2 at +2
        const auto m = model_from({GrmItemParams{2.0, {-2.0}}, GrmItemParams{2.0, {2.0}}});
        auto s = SessionState::start(ids(2), Strategy::Alirt, Scoring::Latent);
        s.theta.theta = -1.8;
        CHECK(alirt_next(m, s) == 1);
        s.theta.theta = 1.8;
        CHECK(alirt_next(m, s) == 2);
    }

    TEST_CASE("update validates and matches the grid estimate")
    {
        const auto params = random_grm_items(6, 4, 9);
        const LatentScorer scorer(model_from(params));
        auto s = SessionState::start(ids(6), Strategy::Alirt, Scoring::Latent);
        std::mt19937_64 rng(1);
        std::uniform_int_distribution<int> lvl(1, 4);
        for (int step = 0; step < 6; ++step) {
            const ItemId next = alirt_next(scorer.model(), s);
            s = alirt_update(scorer, s, next, lvl(rng), 0.5 * step);
            CHECK(s.administered.size() == static_cast<std::size_t>(step + 1));
            CHECK(std::abs(s.theta.theta - grid_map(scorer.model(), s.responses)) <= 1e-3);
        }
        CHECK(s.exhausted());
        CHECK(ctt_score(s) == doctest::Approx(1.25));

        auto fresh = SessionState::start(ids(6), Strategy::Alirt, Scoring::Latent);
        fresh = alirt_update(scorer, fresh, 2, 1, 0.0);
        auto code_of = [&](auto f) {
            try {
                f();
            } catch (const Error& e) {
                return e.code();
            }
            return Errc::Io;
        };
        CHECK(code_of([&] { alirt_update(scorer, fresh, 2, 1, 0.0); }) == Errc::ItemAlreadyAdministered);
        CHECK(code_of([&] { alirt_update(scorer, fresh, 9, 1, 0.0); }) == Errc::UnknownItemId);
        const auto before = fresh;
        CHECK_THROWS(alirt_update(scorer, fresh, 3, 7, 0.0));
        CHECK(fresh.administered == before.administered);
        auto empty = SessionState::start(ids(6), Strategy::Alirt, Scoring::Yhat);
        CHECK(code_of([&] { ctt_score(empty); }) == Errc::EmptySession);
    }

    TEST_CASE("adaptive selection beats random order early on")
    {
        const auto params = random_grm_items(11, 8, 31);
        const LatentScorer scorer(model_from(params));
        std::array<double, 3> err_alirt{}, err_random{};
        int count = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto sim = simulate_grm({200, params, seed});
            for (int i = 0; i < 200; ++i) {
                auto a = SessionState::start(ids(11), Strategy::Alirt, Scoring::Latent);
                const auto order = random_order(ids(11), seed * 1000 + static_cast<std::uint64_t>(i));
                std::vector<ItemResponse> rnd;
                for (int k = 0; k < 3; ++k) {
                    const ItemId next = alirt_next(scorer.model(), a);
                    a = alirt_update(scorer, a, next, sim.levels(i, next - 1), 0.0);
                    rnd.push_back({order[static_cast<std::size_t>(k)], sim.levels(i, order[static_cast<std::size_t>(k)] - 1)});
                    err_alirt[static_cast<std::size_t>(k)] += std::abs(a.theta.theta - sim.theta(i));
                    err_random[static_cast<std::size_t>(k)] += std::abs(scorer.estimate(rnd).theta - sim.theta(i));
                }
                ++count;
            }
        }
        for (std::size_t k = 0; k < 3; ++k) {
            MESSAGE("k=" << k + 1 << " alirt " << err_alirt[k] / count << " random " << err_random[k] / count);
            CHECK(err_alirt[k] <= err_random[k]);
        }
    }

    TEST_CASE("fixed orders rank a planted item first")
    {
        std::mt19937_64 rng(4);
        std::normal_distribution<double> z;
        const int n = 400;
        LevelMatrix lv(n, 5);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            y(i) = z(rng);
            for (int j = 0; j < 5; ++j) {
                const double signal = j == 2 ? 3.0 * y(i) : (j == 4 ? 0.5 * y(i) : 0.0);
                lv(i, j) = std::clamp(static_cast<int>(std::lround(4 + signal + z(rng))), 1, 8);
            }
        }
        const auto f = fit_fixed_orders(lv, y);
        CHECK(f.forward.front() == 3);
        CHECK(f.forward[1] == 5);
        CHECK(f.backward.front() == 3);
        CHECK(f.forward == f.backward);
        auto sorted = f.forward;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == ids(5));

        LevelMatrix flat = LevelMatrix::Ones(10, 3);
        const auto g = fit_fixed_orders(flat, Eigen::VectorXd::LinSpaced(10, 0, 1));
        CHECK(g.forward == ids(3));
        CHECK(g.backward == ids(3));
        CHECK(g.correlations == std::vector<double>{0, 0, 0});
    }

    TEST_CASE("random order is a reproducible permutation")
    {
        const auto items = ids(11);
        const auto a = random_order(items, 42);
        CHECK(a == random_order(items, 42));
        CHECK(a != random_order(items, 43));
        auto s = a;
        std::sort(s.begin(), s.end());
        CHECK(s == items);
        // every item reaches the first slot over many seeds
        std::set<ItemId> firsts;
        for (std::uint64_t seed = 0; seed < 500; ++seed)
            firsts.insert(random_order(items, seed).front());
        CHECK(firsts.size() == 11);
    }

    TEST_CASE("tree walk adapts to answers and falls back at leaves")
    {
        RegressionTree t;
        t.nodes.resize(5);
        t.nodes[0] = {2, 3.5, 1, 2, 0.0, 100};
        t.nodes[1] = {0, 0.0, -1, -1, -1.0, 50};
        t.nodes[2] = {5, 6.5, 3, 4, 1.0, 50};
        t.nodes[3] = {0, 0.0, -1, -1, 0.5, 25};
        t.nodes[4] = {0, 0.0, -1, -1, 2.0, 25};
        const std::vector<ItemId> fallback{4, 1, 2, 3, 5};
        auto s = SessionState::start(ids(5), Strategy::Tree, Scoring::Latent);
        CHECK(tree_next(t, true, fallback, s) == 2);
        auto high = s;
        push(high, 2, 6, -10.0);
        CHECK(tree_next(t, true, fallback, high) == 5);
        CHECK(tree_next(t, false, fallback, high) == 4); // y-hat -10 goes left
        auto low = s;
        push(low, 2, 1, 0.0);
        CHECK(tree_next(t, true, fallback, low) == 4);
        push(high, 5, 8, 0.0);
        CHECK(tree_next(t, true, fallback, high) == 4);
        // root feature answered elsewhere in the fallback: walk stops
        auto other = s;
        other.remaining.erase(std::find(other.remaining.begin(), other.remaining.end(), 2));
        CHECK(tree_next(t, true, fallback, other) == 4);
    }
}
