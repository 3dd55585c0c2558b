#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "alba/cohort.hpp"
#include "alba/data_model.hpp"

namespace alba {

/// Linear model with an unpenalized intercept.
struct RidgeModel {
    Eigen::VectorXd weights;
    double intercept = 0.0;
    double lambda = 0.0;

    double predict(const Eigen::VectorXd& x) const { return weights.dot(x) + intercept; }
    Eigen::VectorXd predict(const Eigen::MatrixXd& rows) const
    {
        return (rows * weights).array() + intercept;
    }
    int parameter_count() const { return static_cast<int>(weights.size()) + 1; }
};

/// Minimizes ||y - Xw - b||^2 + lambda ||w||^2 by solving the centered normal
/// equations. lambda == 0 with rank-deficient X throws SingularSystem.
RidgeModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda);

struct RidgeCvOptions {
    std::vector<double> lambdas{1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3, 1e4};
    int folds = 5;
    std::uint64_t seed = 0;
};

/// Picks lambda by k-fold RMSE (ties -> the smaller lambda), then refits on
/// every row. Fewer than 2*folds rows skips the search and uses lambda = 1.
RidgeModel fit_ridge_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const RidgeCvOptions& options);

using ItemScoreVector = std::map<ItemId, double>;
using ItemModels = std::map<ItemId, RidgeModel>;

/// One ridge model per item, fit on the `rows` of `cohort` that answered it.
/// The internal CV seed is options.seed mixed with the item id.
ItemModels fit_item_models(const Cohort& cohort, std::span<const std::size_t> rows,
                           const RidgeCvOptions& options = {});

/// Per-item predicted measure for every respondent: n x J, NaN where the item
/// is unanswered.
Eigen::MatrixXd predict_items(const ItemModels& models, const Cohort& cohort);

/// Ridge model keyed by the exact (sorted) item set it was trained on.
struct SubsetModel {
    std::vector<ItemId> items;
    RidgeModel model;
};

/// Regr(Y-hat): the administered items' predicted measures, in item-id order,
/// fed to a model trained on exactly that set.
double score_regr_yhat(const ItemScoreVector& administered, const SubsetModel& model);

/// Regr(X): the administered items' embeddings concatenated in item-id order.
double score_regr_x(const std::map<ItemId, Eigen::VectorXd>& administered, const SubsetModel& model);

} // namespace alba
