#include "alba/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "alba/error.hpp"

namespace alba {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw Error(Errc::InvalidArgument, "length mismatch: " + std::to_string(x.size()) + " vs " +
                                               std::to_string(y.size()));
    if (x.size() < 2)
        throw Error(Errc::InvalidArgument, "need at least two points");
}

std::vector<double> ranks(std::span<const double> x)
{
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]])
            ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

} // namespace

double mean(std::span<const double> x)
{
    if (x.empty())
        throw Error(Errc::InvalidArgument, "mean of nothing");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double pearson_r(std::span<const double> x, std::span<const double> y)
{
    check_pair(x, y);
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
        throw Error(Errc::ZeroVariance, "correlation undefined for a constant vector");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman_r(std::span<const double> x, std::span<const double> y)
{
    check_pair(x, y);
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    return pearson_r(rx, ry);
}

double rmse(std::span<const double> prediction, std::span<const double> target)
{
    if (prediction.size() != target.size() || prediction.empty())
        throw Error(Errc::InvalidArgument, "rmse needs equal non-empty vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i)
        s += (prediction[i] - target[i]) * (prediction[i] - target[i]);
    return std::sqrt(s / static_cast<double>(target.size()));
}

} // namespace alba
