#include <cmath>

#include "doctest.h"

#include "alba/kernels.hpp"
#include "alba/synthetic.hpp"

using namespace alba;

TEST_SUITE("kernels")
{
    TEST_CASE("parallel e-step matches the serial reference")
    {
        const auto params = random_grm_items(5, 4, 1);
        auto sim = simulate_grm({1000, params, 2});
        sim.levels(3, 2) = 0; // unanswered cells are skipped
        const auto q = Quadrature::standard_normal();
        std::vector<Eigen::MatrixXd> lp;
        for (const auto& p : params) {
            Eigen::MatrixXd m(4, q.points);
            for (int n = 0; n < q.points; ++n)
                for (int k = 1; k <= 4; ++k)
                    m(k - 1, n) = std::log(category_prob(p, k, q.nodes[static_cast<std::size_t>(n)]));
            lp.push_back(m);
        }
        const kernels::EStepInput in{&sim.levels, lp, q.log_weights};
        const auto a = kernels::estep_serial(in);
        const auto b = kernels::estep_parallel(in);
        CHECK(a.loglik == doctest::Approx(b.loglik).epsilon(1e-12));
        double total = 0.0;
        for (std::size_t j = 0; j < a.counts.size(); ++j) {
            CHECK((a.counts[j] - b.counts[j]).cwiseAbs().maxCoeff() < 1e-9);
            total += a.counts[j].sum();
        }
        // every answered cell contributes one unit of posterior mass
        CHECK(total == doctest::Approx(1000.0 * 5 - 1));
        // repeated parallel runs are bit-identical
        const auto c = kernels::estep_parallel(in);
        CHECK(c.loglik == b.loglik);
    }

    TEST_CASE("parallel batch MAP matches the serial reference")
    {
        const auto params = random_grm_items(6, 3, 4);
        GrmModel m;
        m.levels = 3;
        for (int j = 0; j < 6; ++j)
            m.items.emplace(j + 1, GrmItem{params[static_cast<std::size_t>(j)], {0, 1, 2, 3}});
        const LatentScorer scorer(m);
        const auto sim = simulate_grm({300, params, 5});
        std::vector<std::vector<ItemResponse>> sets(300);
        for (int i = 0; i < 300; ++i)
            for (int j = 0; j <= i % 6; ++j)
                sets[static_cast<std::size_t>(i)].push_back({j + 1, sim.levels(i, j)});
        const auto a = kernels::map_batch_serial(scorer, sets);
        const auto b = kernels::map_batch_parallel(scorer, sets);
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(a[i].theta == b[i].theta);
    }
}
