#pragma once

#include <vector>

#include <Eigen/Dense>

#include "alba/data_model.hpp"

namespace alba {

struct TreeNode {
    ItemId feature = 0; // 0 marks a leaf
    double threshold = 0.0;
    int left = -1;  // value <= threshold
    int right = -1; // value > threshold
    double value = 0.0;
    int samples = 0;

    bool is_leaf() const { return feature == 0; }
};

/// CART regression tree grown best-first by variance reduction. Node 0 is the
/// root.
struct RegressionTree {
    std::vector<TreeNode> nodes;

    int leaf_count() const;
    /// Thresholds, features and leaf values.
    int parameter_count() const;
    double predict(const Eigen::VectorXd& features) const;
};

struct TreeOptions {
    int max_leaves = 16;
    int min_samples_leaf = 10;
};

/// `features` is respondents x J (column j-1 holds item j). Rows containing NaN
/// are skipped. Fewer than two usable rows throws DegenerateTree; data with
/// no split that lowers the squared error gives a single leaf.
RegressionTree fit_regression_tree(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                                   const TreeOptions& options = {});

} // namespace alba
