#include "alba/item_scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "alba/error.hpp"

namespace alba {

RidgeModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda)
{
    if (x.rows() != y.size())
        throw Error(Errc::InvalidArgument, "ridge: X and y row counts differ");
    if (x.rows() < 1)
        throw Error(Errc::InsufficientData, "ridge: no rows");
    if (!(lambda >= 0.0) || !x.allFinite() || !y.allFinite())
        throw Error(Errc::InvalidArgument, "ridge: lambda must be >= 0 and inputs finite");

    const Eigen::RowVectorXd x_mean = x.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd xc = x.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;

    RidgeModel m;
    m.lambda = lambda;
    if (x.cols() == 0) {
        m.weights.resize(0);
    } else if (lambda == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xc);
        if (qr.rank() < x.cols())
            throw Error(Errc::SingularSystem, "ridge: lambda = 0 and X is rank deficient");
        m.weights = qr.solve(yc);
    } else {
        Eigen::MatrixXd gram = xc.transpose() * xc;
        gram.diagonal().array() += lambda;
        m.weights = gram.llt().solve(xc.transpose() * yc);
    }
    m.intercept = y_mean - x_mean.dot(m.weights);
    return m;
}

RidgeModel fit_ridge_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const RidgeCvOptions& options)
{
    const auto n = static_cast<std::size_t>(x.rows());
    if (options.lambdas.empty())
        throw Error(Errc::InvalidArgument, "ridge cv: empty lambda grid");
    if (options.folds < 2 || n < 2 * static_cast<std::size_t>(options.folds))
        return fit_ridge(x, y, 1.0);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(options.seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> fold_of(n);
    for (std::size_t r = 0; r < n; ++r)
        fold_of[order[r]] = static_cast<int>(r % static_cast<std::size_t>(options.folds));

    double best_rmse = std::numeric_limits<double>::infinity();
    double best_lambda = options.lambdas.front();
    for (double lambda : options.lambdas) {
        double sse = 0.0;
        for (int f = 0; f < options.folds; ++f) {
            std::vector<Eigen::Index> tr, te;
            for (std::size_t i = 0; i < n; ++i)
                (fold_of[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
            const Eigen::MatrixXd xtr = x(tr, Eigen::all);
            const Eigen::VectorXd ytr = y(tr);
            const auto m = fit_ridge(xtr, ytr, lambda);
            for (auto i : te) {
                const double e = y(i) - m.predict(Eigen::VectorXd(x.row(i).transpose()));
                sse += e * e;
            }
        }
        const double rmse = std::sqrt(sse / static_cast<double>(n));
        if (rmse < best_rmse) {
            best_rmse = rmse;
            best_lambda = lambda;
        }
    }
    return fit_ridge(x, y, best_lambda);
}

ItemModels fit_item_models(const Cohort& cohort, std::span<const std::size_t> rows,
                           const RidgeCvOptions& options)
{
    ItemModels out;
    for (ItemId item = 1; item <= cohort.item_count(); ++item) {
        std::vector<Eigen::Index> used;
        for (auto r : rows)
            if (cohort.has(r, item))
                used.push_back(static_cast<Eigen::Index>(r));
        if (used.size() < 2)
            throw Error(Errc::InsufficientData,
                        "item " + std::to_string(item) + " has fewer than 2 responses in the split");
        const Eigen::MatrixXd x = cohort.embeddings[static_cast<std::size_t>(item - 1)](used, Eigen::all);
        const Eigen::VectorXd y = cohort.measure(used);
        auto item_options = options;
        item_options.seed = options.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(item);
        out.emplace(item, fit_ridge_cv(x, y, item_options));
    }
    return out;
}

Eigen::MatrixXd predict_items(const ItemModels& models, const Cohort& cohort)
{
    const auto n = static_cast<Eigen::Index>(cohort.size());
    Eigen::MatrixXd out(n, cohort.item_count());
    for (ItemId item = 1; item <= cohort.item_count(); ++item) {
        const auto& model = models.at(item);
        const auto& emb = cohort.embeddings[static_cast<std::size_t>(item - 1)];
        for (Eigen::Index i = 0; i < n; ++i)
            out(i, item - 1) = cohort.has(static_cast<std::size_t>(i), item)
                                   ? model.predict(Eigen::VectorXd(emb.row(i).transpose()))
                                   : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

namespace {

void check_set(const std::vector<ItemId>& expected, const auto& administered)
{
    bool same = expected.size() == administered.size();
    if (same) {
        auto it = administered.begin();
        for (ItemId id : expected) {
            if (it->first != id) {
                same = false;
                break;
            }
            ++it;
        }
    }
    if (!same)
        throw Error(Errc::SetMismatch, "administered items differ from the model's training set");
}

} // namespace

double score_regr_yhat(const ItemScoreVector& administered, const SubsetModel& model)
{
    check_set(model.items, administered);
    Eigen::VectorXd x(static_cast<Eigen::Index>(administered.size()));
    Eigen::Index k = 0;
    for (const auto& [id, value] : administered)
        x(k++) = value;
    if (x.size() != model.model.weights.size())
        throw Error(Errc::SetMismatch, "model width does not match the item set");
    return model.model.predict(x);
}

double score_regr_x(const std::map<ItemId, Eigen::VectorXd>& administered, const SubsetModel& model)
{
    check_set(model.items, administered);
    Eigen::Index width = 0;
    for (const auto& [id, v] : administered)
        width += v.size();
    if (width != model.model.weights.size())
        throw Error(Errc::SetMismatch, "model width does not match the concatenated embeddings");
    Eigen::VectorXd x(width);
    Eigen::Index at = 0;
    for (const auto& [id, v] : administered) {
        x.segment(at, v.size()) = v;
        at += v.size();
    }
    return model.model.predict(x);
}

} // namespace alba
