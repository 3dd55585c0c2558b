#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "alba/error.hpp"
#include "alba/item_scoring.hpp"
#include "alba/stats.hpp"

using namespace alba;

namespace {

Eigen::MatrixXd random_matrix(int n, int d, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x.data()[i] = z(rng);
    return x;
}

// Oracle: solve the augmented system [X 1]^T [X 1] + diag(lambda,..,lambda,0).
Eigen::VectorXd augmented_solution(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda)
{
    Eigen::MatrixXd a(x.rows(), x.cols() + 1);
    a << x, Eigen::VectorXd::Ones(x.rows());
    Eigen::MatrixXd g = a.transpose() * a;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        g(j, j) += lambda;
    return g.fullPivLu().solve(a.transpose() * y);
}

} // namespace

TEST_SUITE("item_scoring")
{
    TEST_CASE("ridge matches the augmented normal-equation oracle")
    {
        const auto x = random_matrix(60, 5, 1);
        Eigen::VectorXd y = x * Eigen::VectorXd::LinSpaced(5, -1, 1) + Eigen::VectorXd::Constant(60, 3.0);
        y += 0.1 * random_matrix(60, 1, 2).col(0);
        for (double lambda : {0.0, 0.5, 10.0}) {
            const auto m = fit_ridge(x, y, lambda);
            const auto oracle = augmented_solution(x, y, lambda);
            for (int j = 0; j < 5; ++j)
                CHECK(m.weights(j) == doctest::Approx(oracle(j)).epsilon(1e-10));
            CHECK(m.intercept == doctest::Approx(oracle(5)).epsilon(1e-10));
            CHECK(m.parameter_count() == 6);
        }
    }

    TEST_CASE("unregularized rank-deficient design is singular")
    {
        Eigen::MatrixXd x = random_matrix(20, 3, 3);
        x.col(2) = 2.0 * x.col(0);
        const Eigen::VectorXd y = x.col(0);
        try {
            fit_ridge(x, y, 0.0);
            FAIL("expected SingularSystem");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::SingularSystem);
        }
        CHECK_NOTHROW(fit_ridge(x, y, 1.0));
    }

    TEST_CASE("cross-validation prefers small lambda on clean data and large on noise")
    {
        const auto x = random_matrix(200, 4, 5);
        const Eigen::VectorXd clean = x * Eigen::Vector4d(1, 2, -1, 0.5);
        RidgeCvOptions o;
        CHECK(fit_ridge_cv(x, clean, o).lambda == doctest::Approx(1e-2));
        const Eigen::VectorXd noise = random_matrix(200, 1, 6).col(0);
        CHECK(fit_ridge_cv(x, noise, o).lambda >= 1e2);
        CHECK(fit_ridge_cv(x.topRows(6), clean.head(6), o).lambda == 1.0);
    }

    TEST_CASE("regr scoring checks the administered set")
    {
        SubsetModel sm{{1, 3}, RidgeModel{Eigen::Vector2d(0.5, 0.25), 1.0, 1.0}};
        CHECK(score_regr_yhat({{1, 2.0}, {3, 4.0}}, sm) == doctest::Approx(3.0));
        try {
            score_regr_yhat({{1, 2.0}, {2, 4.0}}, sm);
            FAIL("expected SetMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::SetMismatch);
        }
        SubsetModel sx{{2}, RidgeModel{Eigen::Vector2d(1.0, -1.0), 0.5, 1.0}};
        CHECK(score_regr_x({{2, Eigen::Vector2d(3.0, 1.0)}}, sx) == doctest::Approx(2.5));
    }

    TEST_CASE("noiseless cohort: item models recover the latent ordering")
    {
        LanguageCohortSpec spec;
        spec.respondents = 180;
        spec.noise_sd = 0.0;
        spec.measure_noise_sd = 0.0;
        spec.measure_min = -1e9;
        spec.measure_max = 1e9;
        const auto c = simulate_language_cohort(spec);
        const auto cohort = testutil::cohort_of(c);
        std::vector<std::size_t> rows(cohort.size());
        std::iota(rows.begin(), rows.end(), 0);
        const auto models = fit_item_models(cohort, rows);
        const Eigen::MatrixXd yhat = predict_items(models, cohort);
        const std::vector<double> theta(c.theta.data(), c.theta.data() + c.theta.size());
        for (int j = 0; j < 11; ++j) {
            const Eigen::VectorXd col = yhat.col(j);
            CHECK(spearman_r(std::vector<double>(col.data(), col.data() + col.size()), theta) ==
                  doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}
