#include "alba/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "alba/error.hpp"
#include "alba/stats.hpp"

namespace alba {

namespace {

struct NamedStrategy {
    Strategy id;
    std::string_view name;
};
constexpr NamedStrategy kStrategyNames[] = {
    {Strategy::Alirt, "alirt"},     {Strategy::ActorCritic, "actor_critic"}, {Strategy::Random, "random"},
    {Strategy::Forward, "forward"}, {Strategy::Backward, "backward"},        {Strategy::Tree, "tree"},
};

struct NamedScoring {
    Scoring id;
    std::string_view name;
};
constexpr NamedScoring kScoringNames[] = {
    {Scoring::Latent, "latent"},
    {Scoring::Yhat, "yhat"},
    {Scoring::RegrYhat, "regr_yhat"},
    {Scoring::RegrX, "regr_x"},
};

void require_remaining(const SessionState& state)
{
    if (state.remaining.empty())
        throw Error(Errc::NoItemsRemaining, "every item has been administered");
}

ItemId first_remaining(std::span<const ItemId> order, const SessionState& state)
{
    for (ItemId id : order)
        if (state.is_remaining(id))
            return id;
    return state.remaining.front();
}

class AlirtSelector final : public Selector {
public:
    explicit AlirtSelector(const GrmModel& model) : model_(model) {}
    ItemId next(const SessionState& state) const override { return alirt_next(model_, state); }

private:
    const GrmModel& model_;
};

class ActorCriticSelector final : public Selector {
public:
    explicit ActorCriticSelector(const ActorCriticModel& model) : model_(model) {}
    ItemId next(const SessionState& state) const override
    {
        require_remaining(state);
        return model_.next(state.administered_yhat(), state.remaining);
    }

private:
    const ActorCriticModel& model_;
};

class OrderSelector final : public Selector {
public:
    explicit OrderSelector(std::vector<ItemId> order) : order_(std::move(order)) {}
    ItemId next(const SessionState& state) const override
    {
        require_remaining(state);
        return first_remaining(order_, state);
    }

private:
    std::vector<ItemId> order_;
};

class TreeSelector final : public Selector {
public:
    TreeSelector(const RegressionTree& tree, bool level_features, std::vector<ItemId> fallback)
        : tree_(tree), level_features_(level_features), fallback_(std::move(fallback))
    {
    }
    ItemId next(const SessionState& state) const override
    {
        return tree_next(tree_, level_features_, fallback_, state);
    }

private:
    const RegressionTree& tree_;
    bool level_features_;
    std::vector<ItemId> fallback_;
};

std::vector<ItemId> all_items(int count)
{
    std::vector<ItemId> ids(static_cast<std::size_t>(count));
    std::iota(ids.begin(), ids.end(), 1);
    return ids;
}

} // namespace

std::string_view strategy_name(Strategy s)
{
    for (const auto& n : kStrategyNames)
        if (n.id == s)
            return n.name;
    return "unknown";
}

std::string_view scoring_name(Scoring s)
{
    for (const auto& n : kScoringNames)
        if (n.id == s)
            return n.name;
    return "unknown";
}

Strategy parse_strategy(std::string_view name)
{
    for (const auto& n : kStrategyNames)
        if (n.name == name)
            return n.id;
    throw Error(Errc::UnknownStrategy, "unknown strategy '" + std::string(name) + "'");
}

Scoring parse_scoring(std::string_view name)
{
    for (const auto& n : kScoringNames)
        if (n.name == name)
            return n.id;
    throw Error(Errc::UnknownScoring, "unknown scoring '" + std::string(name) + "'");
}

SessionState SessionState::start(std::span<const ItemId> items, Strategy strategy, Scoring scoring, double theta0)
{
    SessionState s;
    s.remaining.assign(items.begin(), items.end());
    std::sort(s.remaining.begin(), s.remaining.end());
    s.remaining.erase(std::unique(s.remaining.begin(), s.remaining.end()), s.remaining.end());
    s.theta.theta = theta0;
    s.strategy = strategy;
    s.scoring = scoring;
    return s;
}

bool SessionState::was_administered(ItemId item) const
{
    return std::find(administered.begin(), administered.end(), item) != administered.end();
}

bool SessionState::is_remaining(ItemId item) const
{
    return std::binary_search(remaining.begin(), remaining.end(), item);
}

ItemScoreVector SessionState::administered_yhat() const
{
    ItemScoreVector v;
    for (std::size_t i = 0; i < administered.size(); ++i)
        v[administered[i]] = yhat_history[i];
    return v;
}

ItemId alirt_next(const GrmModel& model, const SessionState& state)
{
    require_remaining(state);
    ItemId best = 0;
    double best_info = -1.0;
    for (ItemId id : state.remaining) { // ascending, so strict > keeps the lowest id on ties
        const double info = item_information(model.params(id), state.theta.theta);
        if (info > best_info) {
            best_info = info;
            best = id;
        }
    }
    return best;
}

SessionState alirt_update(const LatentScorer& scorer, SessionState state, ItemId item, int level, double yhat)
{
    if (state.was_administered(item))
        throw Error(Errc::ItemAlreadyAdministered, "item " + std::to_string(item) + " was already administered");
    auto it = std::lower_bound(state.remaining.begin(), state.remaining.end(), item);
    if (it == state.remaining.end() || *it != item)
        throw Error(Errc::UnknownItemId, "item " + std::to_string(item) + " is not available in this session");
    // validates the level before anything is mutated
    scorer.model().effective_category(item, level);
    state.remaining.erase(it);
    state.administered.push_back(item);
    state.responses.push_back({item, level});
    state.yhat_history.push_back(yhat);
    state.theta = scorer.estimate(state.responses);
    return state;
}

double ctt_score(const SessionState& state)
{
    if (state.yhat_history.empty())
        throw Error(Errc::EmptySession, "no administered items to average");
    return mean(state.yhat_history);
}

FixedOrders fit_fixed_orders(const LevelMatrix& levels, const Eigen::VectorXd& measure)
{
    const int items = static_cast<int>(levels.cols());
    FixedOrders out;
    out.correlations.assign(static_cast<std::size_t>(items), 0.0);
    for (int j = 0; j < items; ++j) {
        std::vector<double> x, y;
        for (Eigen::Index i = 0; i < levels.rows(); ++i) {
            if (levels(i, j) <= 0)
                continue;
            x.push_back(levels(i, j));
            y.push_back(measure(i));
        }
        try {
            out.correlations[static_cast<std::size_t>(j)] = std::abs(pearson_r(x, y));
        } catch (const Error&) {
            out.correlations[static_cast<std::size_t>(j)] = 0.0;
        }
    }
    const auto& r = out.correlations;
    out.forward = all_items(items);
    std::stable_sort(out.forward.begin(), out.forward.end(),
                     [&](ItemId a, ItemId b) { return r[a - 1] > r[b - 1]; });

    std::vector<ItemId> pool = all_items(items);
    std::vector<ItemId> dropped;
    while (!pool.empty()) {
        auto worst = pool.begin();
        for (auto it = pool.begin(); it != pool.end(); ++it)
            if (r[*it - 1] <= r[*worst - 1]) // later (higher) ids drop first on ties
                worst = it;
        dropped.push_back(*worst);
        pool.erase(worst);
    }
    out.backward.assign(dropped.rbegin(), dropped.rend());
    return out;
}

std::vector<ItemId> random_order(std::span<const ItemId> items, std::uint64_t seed)
{
    std::vector<ItemId> order(items.begin(), items.end());
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::uint64_t j = rng() % i;
        std::swap(order[i - 1], order[static_cast<std::size_t>(j)]);
    }
    return order;
}

const GrmModel& FittedModels::grm() const
{
    if (!scorer)
        throw Error(Errc::BundleNotLoaded, "no IRT model loaded");
    return scorer->model();
}

bool FittedModels::supports(Strategy strategy, Scoring scoring) const
{
    if (!scorer)
        return false;
    switch (strategy) {
    case Strategy::ActorCritic:
        if (!actor_critic)
            return false;
        break;
    case Strategy::Tree:
        if (!(scoring == Scoring::Latent ? tree_latent : tree_yhat))
            return false;
        break;
    default:
        break;
    }
    if (scoring == Scoring::RegrYhat && !actor_critic)
        return false;
    return scoring != Scoring::RegrX;
}

std::unique_ptr<Selector> make_selector(const FittedModels& models, Strategy strategy, Scoring scoring,
                                        std::uint64_t session_seed)
{
    switch (strategy) {
    case Strategy::Alirt:
        return std::make_unique<AlirtSelector>(models.grm());
    case Strategy::ActorCritic:
        if (!models.actor_critic)
            throw Error(Errc::UnknownStrategy, "no actor-critic model loaded");
        return std::make_unique<ActorCriticSelector>(*models.actor_critic);
    case Strategy::Random:
        return std::make_unique<OrderSelector>(random_order(all_items(models.items), session_seed));
    case Strategy::Forward:
        return std::make_unique<OrderSelector>(models.fixed_orders.forward);
    case Strategy::Backward:
        return std::make_unique<OrderSelector>(models.fixed_orders.backward);
    case Strategy::Tree: {
        const bool latent = scoring == Scoring::Latent;
        const auto& tree = latent ? models.tree_latent : models.tree_yhat;
        if (!tree)
            throw Error(Errc::UnknownStrategy, "no decision tree loaded");
        return std::make_unique<TreeSelector>(*tree, latent, models.fixed_orders.forward);
    }
    }
    throw Error(Errc::UnknownStrategy, "unknown strategy");
}

ItemId tree_next(const RegressionTree& tree, bool level_features, std::span<const ItemId> fallback,
                 const SessionState& state)
{
    require_remaining(state);
    int node = 0;
    while (node >= 0 && static_cast<std::size_t>(node) < tree.nodes.size()) {
        const auto& n = tree.nodes[static_cast<std::size_t>(node)];
        if (n.is_leaf())
            break;
        const auto pos = std::find(state.administered.begin(), state.administered.end(), n.feature);
        if (pos == state.administered.end()) {
            if (state.is_remaining(n.feature))
                return n.feature;
            break;
        }
        const auto i = static_cast<std::size_t>(pos - state.administered.begin());
        const double value = level_features ? static_cast<double>(state.responses[i].level) : state.yhat_history[i];
        node = value <= n.threshold ? n.left : n.right;
    }
    return first_remaining(fallback, state);
}

void administer_yhat(const FittedModels& models, SessionState& state, ItemId item, double yhat)
{
    const int level = models.thresholds.level(item, yhat);
    state = alirt_update(*models.scorer, std::move(state), item, level, yhat);
}

void administer(const FittedModels& models, SessionState& state, ItemId item, const Eigen::VectorXd& embedding)
{
    auto it = models.item_models.find(item);
    if (it == models.item_models.end())
        throw Error(Errc::UnknownItemId, "no scoring model for item " + std::to_string(item));
    administer_yhat(models, state, item, it->second.predict(embedding));
}

double session_score(const FittedModels& models, const SessionState& state, Scoring scoring)
{
    switch (scoring) {
    case Scoring::Latent:
        return state.theta.theta;
    case Scoring::Yhat:
        return ctt_score(state);
    case Scoring::RegrYhat:
        if (!models.actor_critic)
            throw Error(Errc::UnknownScoring, "regr_yhat needs the subset measure models");
        if (state.administered.empty())
            throw Error(Errc::EmptySession, "no administered items");
        return models.actor_critic->score(state.administered_yhat());
    case Scoring::RegrX:
        break;
    }
    throw Error(Errc::UnknownScoring, "regr_x is scored from raw embeddings by the caller");
}

} // namespace alba
