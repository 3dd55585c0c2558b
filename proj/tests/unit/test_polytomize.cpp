#include "doctest.h"

#include "alba/error.hpp"
#include "alba/polytomize.hpp"

using namespace alba;

TEST_SUITE("polytomize")
{
    TEST_CASE("percentile interpolates between order statistics")
    {
        const std::vector<double> s{1, 2, 3, 4, 5};
        CHECK(percentile(s, 0.0) == 1.0);
        CHECK(percentile(s, 1.0) == 5.0);
        CHECK(percentile(s, 0.5) == 3.0);
        CHECK(percentile(s, 0.1) == doctest::Approx(1.4)); // position 0.4
    }

    TEST_CASE("thresholds at k/K percentiles, levels by first threshold above")
    {
        std::vector<double> v;
        for (int i = 1; i <= 101; ++i)
            v.push_back(i);
        const auto t = fit_thresholds({{1, v}}, 4);
        // oracle: positions 25, 50, 75 of 0..100 -> values 26, 51, 76; last = max
        CHECK(t.thresholds.at(1) == std::vector<double>{26, 51, 76, 101});
        CHECK(t.level(1, 1.0) == 1);
        CHECK(t.level(1, 25.9) == 1);
        CHECK(t.level(1, 26.0) == 2);
        CHECK(t.level(1, 76.0) == 4);
        CHECK(t.level(1, 1e9) == 4);
        CHECK(t.level(1, -1e9) == 1);
        CHECK(apply_thresholds(t, 60.0, 1) == 3);
        CHECK_THROWS_AS(t.level(2, 0.0), Error);

        // the levels are balanced on the fitting sample
        std::array<int, 5> counts{};
        for (double x : v)
            ++counts[static_cast<std::size_t>(t.level(1, x))];
        for (int k = 1; k <= 3; ++k)
            CHECK(counts[static_cast<std::size_t>(k)] == 25);
    }

    TEST_CASE("too few predictions for K")
    {
        try {
            fit_thresholds({{1, {1.0, 2.0}}}, 3);
            FAIL("expected KTooLargeForData");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::KTooLargeForData);
        }
    }

    TEST_CASE("polytomize marks NaN unanswered and reports unobserved levels")
    {
        const auto t = fit_thresholds({{1, {1, 2, 3, 4}}, {2, {1, 2, 3, 4}}}, 2);
        Eigen::MatrixXd p(3, 2);
        p << 1.0, std::nan(""), 4.0, 1.0, 1.2, 1.1;
        const auto lv = polytomize(t, p);
        CHECK(lv(0, 1) == 0);
        CHECK(lv(1, 0) == 2);
        const std::vector<std::size_t> rows{0, 1, 2};
        const auto un = unobserved_levels(lv, 2, rows);
        CHECK(un.count(1) == 0);
        REQUIRE(un.count(2) == 1);
        CHECK(un.at(2) == std::vector<int>{2});
    }
}
