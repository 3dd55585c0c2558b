#include "alba/actor_critic.hpp"

#include <cmath>
#include <limits>

#include "alba/error.hpp"

namespace alba {

std::vector<ItemId> items_of(ItemMask mask)
{
    std::vector<ItemId> out;
    for (ItemId id = 1; mask != 0; ++id, mask >>= 1)
        if (mask & 1u)
            out.push_back(id);
    return out;
}

ActorCriticCounts actor_critic_counts(int items)
{
    if (items < 1 || items > 31)
        throw Error(Errc::InvalidArgument, "item count out of range");
    const auto j = static_cast<std::uint64_t>(items);
    ActorCriticCounts c;
    c.measure_models = (std::uint64_t{1} << j) - 1;
    c.error_models_nonempty = j * ((std::uint64_t{1} << (j - 1)) - 1);
    c.error_models_cold = j;
    return c;
}

ActorCriticModel::ActorCriticModel(int items) : items_(items)
{
    if (items < 1 || items > 20)
        throw Error(Errc::PowersetTooLarge, "actor-critic supports 1..20 items");
    const std::size_t sets = std::size_t{1} << items;
    measure_.resize(sets);
    measure_present_.assign(sets, 0);
    error_.resize(sets * static_cast<std::size_t>(items));
    error_present_.assign(sets * static_cast<std::size_t>(items), 0);
}

std::size_t ActorCriticModel::error_slot(ItemMask administered, ItemId candidate) const
{
    if (candidate < 1 || candidate > items_)
        throw Error(Errc::UnknownItemId, "candidate item out of range");
    return static_cast<std::size_t>(administered) * static_cast<std::size_t>(items_) +
           static_cast<std::size_t>(candidate - 1);
}

bool ActorCriticModel::has_measure_model(ItemMask set) const
{
    return set < measure_present_.size() && measure_present_[set];
}

bool ActorCriticModel::has_error_model(ItemMask administered, ItemId candidate) const
{
    if (administered >= measure_present_.size() || candidate < 1 || candidate > items_)
        return false;
    return error_present_[error_slot(administered, candidate)] != 0;
}

const RidgeModel& ActorCriticModel::measure_model(ItemMask set) const
{
    if (!has_measure_model(set))
        throw Error(Errc::SetMismatch, "no measure model for this item set");
    return measure_[set];
}

const RidgeModel& ActorCriticModel::error_model(ItemMask administered, ItemId candidate) const
{
    if (!has_error_model(administered, candidate))
        throw Error(Errc::SetMismatch, "no error model for this (set, candidate) pair");
    return error_[error_slot(administered, candidate)];
}

void ActorCriticModel::set_measure_model(ItemMask set, RidgeModel model)
{
    if (set == 0 || set >= measure_.size())
        throw Error(Errc::InvalidArgument, "measure model set out of range");
    measure_[set] = std::move(model);
    measure_present_[set] = 1;
}

void ActorCriticModel::set_error_model(ItemMask administered, ItemId candidate, RidgeModel model)
{
    if (administered >= measure_.size() || (administered & (ItemMask{1} << (candidate - 1))))
        throw Error(Errc::InvalidArgument, "error model key out of range");
    const auto slot = error_slot(administered, candidate);
    error_[slot] = std::move(model);
    error_present_[slot] = 1;
}

ActorCriticCounts ActorCriticModel::counts() const
{
    ActorCriticCounts c;
    for (std::size_t s = 0; s < measure_present_.size(); ++s)
        c.measure_models += measure_present_[s] ? 1 : 0;
    for (std::size_t slot = 0; slot < error_present_.size(); ++slot) {
        if (!error_present_[slot])
            continue;
        if (slot / static_cast<std::size_t>(items_) == 0)
            ++c.error_models_cold;
        else
            ++c.error_models_nonempty;
    }
    return c;
}

std::uint64_t ActorCriticModel::parameter_count() const
{
    std::uint64_t total = 0;
    for (std::size_t s = 0; s < measure_.size(); ++s)
        if (measure_present_[s])
            total += static_cast<std::uint64_t>(measure_[s].parameter_count());
    for (std::size_t s = 0; s < error_.size(); ++s)
        if (error_present_[s])
            total += static_cast<std::uint64_t>(error_[s].parameter_count());
    return total;
}

namespace {

std::pair<ItemMask, Eigen::VectorXd> features_of(const ItemScoreVector& administered)
{
    ItemMask mask = 0;
    Eigen::VectorXd x(static_cast<Eigen::Index>(administered.size()));
    Eigen::Index k = 0;
    for (const auto& [id, v] : administered) {
        mask |= ItemMask{1} << (id - 1);
        x(k++) = v;
    }
    return {mask, x};
}

} // namespace

double ActorCriticModel::score(const ItemScoreVector& administered) const
{
    if (administered.empty())
        throw Error(Errc::EmptySession, "actor-critic scoring needs at least one item");
    const auto [mask, x] = features_of(administered);
    return measure_model(mask).predict(x);
}

double ActorCriticModel::predicted_error(const ItemScoreVector& administered, ItemId candidate) const
{
    const auto [mask, x] = features_of(administered);
    return error_model(mask, candidate).predict(x);
}

ItemId ActorCriticModel::next(const ItemScoreVector& administered, std::span<const ItemId> remaining) const
{
    if (remaining.empty())
        throw Error(Errc::NoItemsRemaining, "no items remaining");
    const auto [mask, x] = features_of(administered);
    ItemId best = 0;
    double best_error = std::numeric_limits<double>::infinity();
    for (ItemId id : remaining) {
        const double e = error_model(mask, id).predict(x);
        if (e < best_error || (e == best_error && id < best) || best == 0) {
            best = id;
            best_error = e;
        }
    }
    return best;
}

Eigen::MatrixXd subset_features(const Eigen::MatrixXd& yhat, ItemMask set, std::vector<Eigen::Index>& rows)
{
    const auto cols = items_of(set);
    rows.clear();
    for (Eigen::Index i = 0; i < yhat.rows(); ++i) {
        bool ok = true;
        for (ItemId id : cols)
            if (std::isnan(yhat(i, id - 1))) {
                ok = false;
                break;
            }
        if (ok)
            rows.push_back(i);
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = yhat(rows[r], cols[c] - 1);
    return x;
}

ActorCriticModel train_actor_critic(const Eigen::MatrixXd& yhat_me, const Eigen::VectorXd& y_me,
                                    const Eigen::MatrixXd& yhat_err, const Eigen::VectorXd& y_err,
                                    const ActorCriticOptions& options)
{
    const int items = static_cast<int>(yhat_me.cols());
    if (items > options.max_items || items > 20)
        throw Error(Errc::PowersetTooLarge, "actor-critic needs J <= " + std::to_string(options.max_items));
    if (yhat_err.cols() != items)
        throw Error(Errc::InvalidArgument, "measure and error splits disagree on J");
    ActorCriticModel model(items);
    const ItemMask full = (ItemMask{1} << items) - 1;

    std::vector<Eigen::Index> rows;
    for (ItemMask set = 1; set <= full; ++set) {
        const auto x = subset_features(yhat_me, set, rows);
        if (rows.size() < 2)
            throw Error(Errc::InsufficientData, "measure split has fewer than 2 complete rows for a subset");
        model.set_measure_model(set, fit_ridge(x, y_me(rows), options.lambda));
    }

    for (ItemMask administered = 0; administered <= full; ++administered) {
        if (administered == full)
            continue;
        for (ItemId candidate = 1; candidate <= items; ++candidate) {
            const ItemMask bit = ItemMask{1} << (candidate - 1);
            if (administered & bit)
                continue;
            const ItemMask target_set = administered | bit;
            const auto x_target = subset_features(yhat_err, target_set, rows);
            if (rows.size() < 2)
                throw Error(Errc::InsufficientData, "error split has fewer than 2 complete rows for a subset");
            const Eigen::VectorXd predicted = model.measure_model(target_set).predict(x_target);
            const Eigen::VectorXd sq = (y_err(rows) - predicted).array().square();
            // features: administered items only, on the same rows
            const auto admin_cols = items_of(administered);
            Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(admin_cols.size()));
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (std::size_t c = 0; c < admin_cols.size(); ++c)
                    x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = yhat_err(rows[r], admin_cols[c] - 1);
            model.set_error_model(administered, candidate, fit_ridge(x, sq, options.lambda));
        }
    }
    return model;
}

} // namespace alba
