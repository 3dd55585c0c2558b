#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "alba/data_model.hpp"
#include "alba/item_scoring.hpp"

namespace alba {

/// Bit j-1 set <=> item j is in the set.
using ItemMask = std::uint32_t;

inline ItemMask mask_of(std::span<const ItemId> items)
{
    ItemMask m = 0;
    for (ItemId id : items)
        m |= ItemMask{1} << (id - 1);
    return m;
}

std::vector<ItemId> items_of(ItemMask mask);

struct ActorCriticCounts {
    std::uint64_t measure_models = 0;        // 2^J - 1
    std::uint64_t error_models_nonempty = 0; // J (2^(J-1) - 1)
    std::uint64_t error_models_cold = 0;     // J
};

/// Closed-form model counts for J items.
ActorCriticCounts actor_critic_counts(int items);

/// Measure models for every non-empty item subset, and error models keyed by
/// (administered subset, candidate item) predicting the squared error the
/// measure model would make once the candidate is added. The empty-subset
/// error models are intercept-only.
class ActorCriticModel {
public:
    ActorCriticModel() = default;
    explicit ActorCriticModel(int items);

    int items() const { return items_; }

    const RidgeModel& measure_model(ItemMask set) const;
    const RidgeModel& error_model(ItemMask administered, ItemId candidate) const;
    bool has_measure_model(ItemMask set) const;
    bool has_error_model(ItemMask administered, ItemId candidate) const;

    void set_measure_model(ItemMask set, RidgeModel model);
    void set_error_model(ItemMask administered, ItemId candidate, RidgeModel model);

    ActorCriticCounts counts() const;
    std::uint64_t parameter_count() const;

    /// Prediction of the measure model for the administered items' y-hat,
    /// taken in item-id order.
    double score(const ItemScoreVector& administered) const;

    /// Predicted squared error of adding `candidate` given the administered
    /// items' y-hat.
    double predicted_error(const ItemScoreVector& administered, ItemId candidate) const;

    /// argmin predicted error over `remaining`; ties go to the lowest id.
    ItemId next(const ItemScoreVector& administered, std::span<const ItemId> remaining) const;

private:
    std::size_t error_slot(ItemMask administered, ItemId candidate) const;

    int items_ = 0;
    std::vector<RidgeModel> measure_;
    std::vector<char> measure_present_;
    std::vector<RidgeModel> error_;
    std::vector<char> error_present_;
};

struct ActorCriticOptions {
    double lambda = 1.0;
    int max_items = 16;
};

/// `yhat_me`/`yhat_err` are respondents x J item predictions (NaN =
/// unanswered), `y_me`/`y_err` the true measure. Measure models are fit on
/// the measure split, error models on the error split.
ActorCriticModel train_actor_critic(const Eigen::MatrixXd& yhat_me, const Eigen::VectorXd& y_me,
                                    const Eigen::MatrixXd& yhat_err, const Eigen::VectorXd& y_err,
                                    const ActorCriticOptions& options = {});

/// Rows of `yhat` with every item of `set` answered, and the corresponding
/// feature matrix (columns in item-id order).
Eigen::MatrixXd subset_features(const Eigen::MatrixXd& yhat, ItemMask set, std::vector<Eigen::Index>& rows);

} // namespace alba
