#include "alba/polytomize.hpp"

#include <algorithm>
#include <cmath>

#include "alba/error.hpp"

namespace alba {

double percentile(std::span<const double> sorted, double q)
{
    if (sorted.empty())
        throw Error(Errc::InvalidArgument, "percentile of an empty sample");
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

int ThresholdTable::level(ItemId item, double yhat) const
{
    auto it = thresholds.find(item);
    if (it == thresholds.end())
        throw Error(Errc::UnknownItemId, "no thresholds for item " + std::to_string(item));
    const auto& t = it->second;
    const auto pos = std::upper_bound(t.begin(), t.end(), yhat);
    if (pos == t.end())
        return levels;
    return static_cast<int>(pos - t.begin()) + 1;
}

ThresholdTable fit_thresholds(const std::map<ItemId, std::vector<double>>& predictions, int levels)
{
    if (levels < 2)
        throw Error(Errc::InvalidArgument, "K must be >= 2");
    ThresholdTable table;
    table.levels = levels;
    for (const auto& [item, values] : predictions) {
        if (values.size() < static_cast<std::size_t>(levels))
            throw Error(Errc::KTooLargeForData, "item " + std::to_string(item) + " has " +
                                                    std::to_string(values.size()) +
                                                    " predictions, fewer than K = " + std::to_string(levels));
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> cuts(static_cast<std::size_t>(levels));
        for (int k = 1; k <= levels; ++k)
            cuts[static_cast<std::size_t>(k - 1)] =
                k == levels ? sorted.back() : percentile(sorted, static_cast<double>(k) / levels);
        table.thresholds.emplace(item, std::move(cuts));
    }
    return table;
}

int apply_thresholds(const ThresholdTable& table, double yhat, ItemId item)
{
    return table.level(item, yhat);
}

LevelMatrix polytomize(const ThresholdTable& table, const Eigen::MatrixXd& predictions)
{
    LevelMatrix out(predictions.rows(), predictions.cols());
    for (Eigen::Index j = 0; j < predictions.cols(); ++j)
        for (Eigen::Index i = 0; i < predictions.rows(); ++i) {
            const double v = predictions(i, j);
            out(i, j) = std::isnan(v) ? 0 : table.level(static_cast<ItemId>(j + 1), v);
        }
    return out;
}

std::map<ItemId, std::vector<int>> unobserved_levels(const LevelMatrix& levels, int k,
                                                     std::span<const std::size_t> rows)
{
    std::map<ItemId, std::vector<int>> out;
    for (Eigen::Index j = 0; j < levels.cols(); ++j) {
        std::vector<char> seen(static_cast<std::size_t>(k) + 1, 0);
        for (auto r : rows) {
            const int v = levels(static_cast<Eigen::Index>(r), j);
            if (v >= 1 && v <= k)
                seen[static_cast<std::size_t>(v)] = 1;
        }
        std::vector<int> missing;
        for (int v = 1; v <= k; ++v)
            if (!seen[static_cast<std::size_t>(v)])
                missing.push_back(v);
        if (!missing.empty())
            out.emplace(static_cast<ItemId>(j + 1), std::move(missing));
    }
    return out;
}

} // namespace alba
