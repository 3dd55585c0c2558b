#include "alba/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "alba/error.hpp"

namespace alba {

namespace {

struct Split {
    ItemId feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

struct Frontier {
    int node;
    std::vector<Eigen::Index> rows;
    Split split;
};

double sse(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& rows)
{
    double mean = 0.0;
    for (auto r : rows)
        mean += y(r);
    mean /= static_cast<double>(rows.size());
    double s = 0.0;
    for (auto r : rows)
        s += (y(r) - mean) * (y(r) - mean);
    return s;
}

Split best_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<Eigen::Index>& rows,
                 int min_leaf)
{
    Split best;
    const auto n = rows.size();
    if (n < 2 * static_cast<std::size_t>(min_leaf))
        return best;
    const double parent = sse(y, rows);
    std::vector<Eigen::Index> order(rows);
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
        std::sort(order.begin(), order.end(), [&](auto a, auto b) {
            return x(a, f) < x(b, f) || (x(a, f) == x(b, f) && a < b);
        });
        double total = 0.0, total_sq = 0.0;
        for (auto r : order) {
            total += y(r);
            total_sq += y(r) * y(r);
        }
        double left = 0.0, left_sq = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left += y(order[i]);
            left_sq += y(order[i]) * y(order[i]);
            const auto nl = static_cast<double>(i + 1);
            const auto nr = static_cast<double>(n - i - 1);
            if (x(order[i], f) == x(order[i + 1], f))
                continue;
            if (i + 1 < static_cast<std::size_t>(min_leaf) || n - i - 1 < static_cast<std::size_t>(min_leaf))
                continue;
            const double right = total - left;
            const double right_sq = total_sq - left_sq;
            const double child = (left_sq - left * left / nl) + (right_sq - right * right / nr);
            const double gain = parent - child;
            if (gain > best.gain + 1e-12 * std::max(1.0, parent)) {
                best.gain = gain;
                best.feature = static_cast<ItemId>(f + 1);
                best.threshold = 0.5 * (x(order[i], f) + x(order[i + 1], f));
            }
        }
    }
    return best;
}

} // namespace

int RegressionTree::leaf_count() const
{
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_leaf(); }));
}

int RegressionTree::parameter_count() const
{
    int internal = static_cast<int>(nodes.size()) - leaf_count();
    return 2 * internal + leaf_count();
}

double RegressionTree::predict(const Eigen::VectorXd& features) const
{
    int at = 0;
    while (!nodes[static_cast<std::size_t>(at)].is_leaf()) {
        const auto& n = nodes[static_cast<std::size_t>(at)];
        at = features(n.feature - 1) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(at)].value;
}

RegressionTree fit_regression_tree(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                                   const TreeOptions& options)
{
    if (features.rows() != target.size())
        throw Error(Errc::InvalidArgument, "tree: feature and target rows differ");
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < features.rows(); ++i)
        if (features.row(i).allFinite() && std::isfinite(target(i)))
            rows.push_back(i);
    if (rows.size() < 2 || features.cols() < 1)
        throw Error(Errc::DegenerateTree, "tree needs at least two complete rows");
    const int min_leaf = std::max(1, options.min_samples_leaf);

    RegressionTree tree;
    auto make_leaf = [&](const std::vector<Eigen::Index>& r) {
        TreeNode node;
        double s = 0.0;
        for (auto i : r)
            s += target(i);
        node.value = s / static_cast<double>(r.size());
        node.samples = static_cast<int>(r.size());
        tree.nodes.push_back(node);
        return static_cast<int>(tree.nodes.size()) - 1;
    };

    // Highest gain first; ties go to the older node.
    auto cmp = [](const Frontier& a, const Frontier& b) {
        return a.split.gain < b.split.gain || (a.split.gain == b.split.gain && a.node > b.node);
    };
    std::priority_queue<Frontier, std::vector<Frontier>, decltype(cmp)> frontier(cmp);
    const int root = make_leaf(rows);
    frontier.push({root, rows, best_split(features, target, rows, min_leaf)});

    int leaves = 1;
    while (!frontier.empty() && leaves < options.max_leaves) {
        Frontier top = frontier.top();
        frontier.pop();
        if (top.split.feature == 0)
            continue;
        std::vector<Eigen::Index> left_rows, right_rows;
        for (auto i : top.rows)
            (features(i, top.split.feature - 1) <= top.split.threshold ? left_rows : right_rows).push_back(i);
        const int left = make_leaf(left_rows);
        const int right = make_leaf(right_rows);
        auto& node = tree.nodes[static_cast<std::size_t>(top.node)];
        node.feature = top.split.feature;
        node.threshold = top.split.threshold;
        node.left = left;
        node.right = right;
        ++leaves;
        frontier.push({left, left_rows, best_split(features, target, left_rows, min_leaf)});
        frontier.push({right, right_rows, best_split(features, target, right_rows, min_leaf)});
    }
    return tree;
}

} // namespace alba
