#pragma once

#include <span>

namespace alba {

/// Sample Pearson correlation. Throws InvalidArgument on length mismatch or
/// fewer than two points, ZeroVariance when either side is constant.
double pearson_r(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of the average ranks (ties share their mean rank).
double spearman_r(std::span<const double> x, std::span<const double> y);

double rmse(std::span<const double> prediction, std::span<const double> target);

double mean(std::span<const double> x);

} // namespace alba
