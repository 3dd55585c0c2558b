#pragma once

#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "alba/data_model.hpp"

namespace alba {

/// Level matrix: respondents x items, 1..K, 0 where unanswered.
using LevelMatrix = Eigen::MatrixXi;

/// Linear interpolation between order statistics: position q * (n - 1) in
/// the sorted sample, q in [0, 1].
double percentile(std::span<const double> sorted, double q);

/// Per-item cut points: threshold[k-1] is the (100k/K)-th percentile of the
/// item's fitting predictions, k = 1..K, so the last one is the maximum.
struct ThresholdTable {
    int levels = 0; // K
    std::map<ItemId, std::vector<double>> thresholds;

    /// Smallest k with threshold[k] > yhat; values at or above the top
    /// threshold clamp to K.
    int level(ItemId item, double yhat) const;
};

ThresholdTable fit_thresholds(const std::map<ItemId, std::vector<double>>& predictions, int levels);

int apply_thresholds(const ThresholdTable& table, double yhat, ItemId item);

/// Polytomizes an n x J prediction matrix (NaN -> 0, unanswered).
LevelMatrix polytomize(const ThresholdTable& table, const Eigen::MatrixXd& predictions);

/// Levels in 1..K with no respondent among `rows`, per item. Items with every
/// level observed are omitted.
std::map<ItemId, std::vector<int>> unobserved_levels(const LevelMatrix& levels, int k,
                                                     std::span<const std::size_t> rows);

} // namespace alba
