#include <cmath>
#include <set>

#include "doctest.h"

#include "alba/error.hpp"
#include "alba/evaluation.hpp"
#include "alba/stats.hpp"
#include "helpers.hpp"

using namespace alba;

namespace {

const EvaluationReport& small_report()
{
    static const EvaluationReport report = [] {
        LanguageCohortSpec spec;
        spec.respondents = 270;
        spec.seed = 3;
        const auto c = simulate_language_cohort(spec);
        BenchmarkConfig config;
        config.seed = 3;
        return run_benchmark(testutil::cohort_of(c), config);
    }();
    return report;
}

} // namespace

TEST_SUITE("evaluation")
{
    TEST_CASE("pearson and friends")
    {
        const std::vector<double> x{1, 2, 3}, y{2, 1, 3};
        CHECK(pearson_r(x, y) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(pearson_r(x, x) == 1.0);
        const std::vector<double> neg{3, 2, 1};
        CHECK(pearson_r(x, neg) == -1.0);
        auto code_of = [](auto f) {
            try {
                f();
            } catch (const Error& e) {
                return e.code();
            }
            return Errc::Io;
        };
        const std::vector<double> flat{4, 4, 4};
        CHECK(code_of([&] { pearson_r(x, flat); }) == Errc::ZeroVariance);
        const std::vector<double> one{1};
        CHECK(code_of([&] { pearson_r(one, one); }) == Errc::InvalidArgument);
        const std::vector<double> two{1, 2};
        CHECK(code_of([&] { pearson_r(x, two); }) == Errc::InvalidArgument);
        const std::vector<double> a{1, 2, 2, 10}, b{1, 3, 3, 4};
        CHECK(spearman_r(a, b) == doctest::Approx(1.0));
        CHECK(rmse(x, y) == doctest::Approx(std::sqrt(2.0 / 3.0)));
        CHECK(mean(x) == 2.0);
    }

    TEST_CASE("rotation rows partition the training folds")
    {
        LanguageCohortSpec spec;
        spec.respondents = 90;
        const auto c = testutil::cohort_of(simulate_language_cohort(spec));
        const auto plan = make_splits(c.ids, 1);
        for (int r = 0; r < kFoldCount; ++r) {
            const auto rows = rotation_rows(c, plan, r);
            CHECK(rows.poly.size() + rows.train.size() == 80);
            CHECK(rows.measure.size() + rows.error.size() == rows.train.size());
            std::set<std::size_t> all(rows.poly.begin(), rows.poly.end());
            all.insert(rows.train.begin(), rows.train.end());
            CHECK(all.size() == 80);
            for (auto i : all)
                CHECK(plan.fold(c.ids[i]) != plan.rotations[static_cast<std::size_t>(r)].test_fold);
        }
    }

    TEST_CASE("report is internally consistent")
    {
        const auto& rep = small_report();
        CHECK(rep.respondents == 270);
        CHECK(rep.items == 11);
        CHECK(rep.folds.size() == 9);
        CHECK(rep.leakage_free());
        std::set<int> folds;
        for (const auto& f : rep.folds) {
            folds.insert(f.fold);
            CHECK(f.test == 30);
            CHECK(f.audit_overlap.empty());
        }
        CHECK(folds.size() == 9);

        // at full length every strategy reproduces the full-set estimate
        for (auto s : kAllStrategies) {
            const auto& full = rep.cell(s, Scoring::Latent, Target::LatentAll, 11);
            REQUIRE(full.r.has_value());
            CHECK(*full.r == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(full.n == 270);
        }
        // every step of every respondent administers one item
        for (const auto& [key, flow] : rep.flows) {
            for (int step = 0; step < 11; ++step)
                CHECK(flow.row(step).sum() == 270);
            for (int item = 0; item < 11; ++item)
                CHECK(flow.col(item).sum() == 270);
        }
        // random order spreads first picks, fixed orders do not within a fold
        const auto& fwd = rep.flows.at({Strategy::Forward, Scoring::Latent});
        CHECK((fwd.row(0).array() > 0).count() <= 9);
        CHECK(rep.predictions.size() == 270u * 11u * 6u * 2u);
    }

    TEST_CASE("pooled metrics are reproducible from the prediction log")
    {
        const auto& rep = small_report();
        const auto dir = testutil::temp_dir("eval_pool");
        write_predictions(dir / "p.csv", rep.predictions);
        const auto back = read_predictions(dir / "p.csv");
        REQUIRE(back.size() == rep.predictions.size());
        const auto cells = summarize(back, rep.config.strategies, rep.config.scorings, rep.items);
        REQUIRE(cells.size() == rep.cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            CHECK(cells[i].n == rep.cells[i].n);
            REQUIRE(cells[i].r.has_value() == rep.cells[i].r.has_value());
            if (cells[i].r)
                CHECK(*cells[i].r == doctest::Approx(*rep.cells[i].r).epsilon(1e-12));
            for (std::size_t f = 0; f < kFoldCount; ++f)
                if (cells[i].per_fold[f] && rep.cells[i].per_fold[f])
                    CHECK(*cells[i].per_fold[f] == doctest::Approx(*rep.cells[i].per_fold[f]).epsilon(1e-12));
        }
        // pooling is not the mean of per-fold correlations
        const auto& c = rep.cell(Strategy::Random, Scoring::Yhat, Target::Ctt, 1);
        double m = 0.0;
        for (const auto& f : c.per_fold)
            m += f.value_or(0.0) / kFoldCount;
        CHECK(std::abs(m - c.r.value()) > 1e-9);
    }

    TEST_CASE("benchmark is deterministic and writes its artefacts")
    {
        LanguageCohortSpec spec;
        spec.respondents = 180;
        spec.seed = 9;
        const auto c = testutil::cohort_of(simulate_language_cohort(spec));
        BenchmarkConfig config;
        config.strategies = {Strategy::Alirt, Strategy::Random};
        config.seed = 9;
        const auto a = run_benchmark(c, config);
        const auto b = run_benchmark(c, config);
        CHECK(a.to_json().dump() == b.to_json().dump());
        const auto dir = testutil::temp_dir("eval_out");
        write_report(dir, a);
        for (auto name : {"report.json", "report.txt", "predictions.csv", "selection_flow.csv"})
            CHECK(std::filesystem::exists(dir / name));
        CHECK(nlohmann::json::parse(testutil::read_file(dir / "report.json")) == a.to_json());
        CHECK(a.text_table().find("alirt") != std::string::npos);
    }

    TEST_CASE("unsupported scoring combinations are rejected")
    {
        LanguageCohortSpec spec;
        spec.respondents = 90;
        const auto c = testutil::cohort_of(simulate_language_cohort(spec));
        BenchmarkConfig config;
        config.strategies = {Strategy::Alirt};
        config.scorings = {Scoring::Latent, Scoring::RegrX};
        const auto rep = run_benchmark(c, config);
        CHECK(rep.cell(Strategy::Alirt, Scoring::RegrX, Target::Ctt, 3).r.has_value());
    }
}
