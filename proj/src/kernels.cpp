#include "alba/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace alba::kernels {

namespace {

EStepResult zero_result(const EStepInput& input)
{
    EStepResult r;
    r.counts.reserve(input.log_probs.size());
    for (const auto& lp : input.log_probs)
        r.counts.push_back(Eigen::MatrixXd::Zero(lp.rows(), lp.cols()));
    return r;
}

// Posterior over nodes for respondent i, written into `post`; returns the
// respondent's marginal log-likelihood.
double respondent_posterior(const EStepInput& input, Eigen::Index i, std::vector<double>& post)
{
    const auto& cats = *input.categories;
    const std::size_t nodes = input.log_weights.size();
    for (std::size_t q = 0; q < nodes; ++q)
        post[q] = input.log_weights[q];
    for (Eigen::Index j = 0; j < cats.cols(); ++j) {
        const int c = cats(i, j);
        if (c <= 0)
            continue;
        const auto& lp = input.log_probs[static_cast<std::size_t>(j)];
        for (std::size_t q = 0; q < nodes; ++q)
            post[q] += lp(c - 1, static_cast<Eigen::Index>(q));
    }
    const double peak = *std::max_element(post.begin(), post.end());
    double total = 0.0;
    for (auto& v : post) {
        v = std::exp(v - peak);
        total += v;
    }
    for (auto& v : post)
        v /= total;
    return peak + std::log(total);
}

void accumulate(const EStepInput& input, Eigen::Index i, const std::vector<double>& post,
                EStepResult& into)
{
    const auto& cats = *input.categories;
    for (Eigen::Index j = 0; j < cats.cols(); ++j) {
        const int c = cats(i, j);
        if (c <= 0)
            continue;
        auto& counts = into.counts[static_cast<std::size_t>(j)];
        for (std::size_t q = 0; q < post.size(); ++q)
            counts(c - 1, static_cast<Eigen::Index>(q)) += post[q];
    }
}

} // namespace

EStepResult estep_serial(const EStepInput& input)
{
    EStepResult result = zero_result(input);
    std::vector<double> post(input.log_weights.size());
    for (Eigen::Index i = 0; i < input.categories->rows(); ++i) {
        result.loglik += respondent_posterior(input, i, post);
        accumulate(input, i, post, result);
    }
    return result;
}

EStepResult estep_parallel(const EStepInput& input)
{
    const Eigen::Index n = input.categories->rows();
    const Eigen::Index chunks = (n + kEStepChunk - 1) / kEStepChunk;
    std::vector<EStepResult> partial(static_cast<std::size_t>(chunks));

#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < chunks; ++c) {
        EStepResult local = zero_result(input);
        std::vector<double> post(input.log_weights.size());
        const Eigen::Index end = std::min(n, (c + 1) * kEStepChunk);
        for (Eigen::Index i = c * kEStepChunk; i < end; ++i) {
            local.loglik += respondent_posterior(input, i, post);
            accumulate(input, i, post, local);
        }
        partial[static_cast<std::size_t>(c)] = std::move(local);
    }

    EStepResult result = zero_result(input);
    for (const auto& p : partial) {
        result.loglik += p.loglik;
        for (std::size_t j = 0; j < result.counts.size(); ++j)
            result.counts[j] += p.counts[j];
    }
    return result;
}

std::vector<LatentEstimate> map_batch_serial(const LatentScorer& scorer,
                                             std::span<const std::vector<ItemResponse>> sets)
{
    std::vector<LatentEstimate> out;
    out.reserve(sets.size());
    for (const auto& s : sets)
        out.push_back(scorer.estimate(s));
    return out;
}

std::vector<LatentEstimate> map_batch_parallel(const LatentScorer& scorer,
                                               std::span<const std::vector<ItemResponse>> sets)
{
    std::vector<LatentEstimate> out(sets.size());
    const auto n = static_cast<std::ptrdiff_t>(sets.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = scorer.estimate(sets[static_cast<std::size_t>(i)]);
    return out;
}

} // namespace alba::kernels
