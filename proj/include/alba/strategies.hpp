#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "alba/actor_critic.hpp"
#include "alba/data_model.hpp"
#include "alba/decision_tree.hpp"
#include "alba/grm.hpp"
#include "alba/item_scoring.hpp"
#include "alba/polytomize.hpp"

namespace alba {

enum class Strategy { Alirt, ActorCritic, Random, Forward, Backward, Tree };
enum class Scoring { Latent, Yhat, RegrYhat, RegrX };

std::string_view strategy_name(Strategy s);
std::string_view scoring_name(Scoring s);
/// Throw UnknownStrategy / UnknownScoring.
Strategy parse_strategy(std::string_view name);
Scoring parse_scoring(std::string_view name);

inline constexpr Strategy kAllStrategies[] = {Strategy::Alirt,   Strategy::ActorCritic, Strategy::Random,
                                              Strategy::Forward, Strategy::Backward,    Strategy::Tree};
inline constexpr Scoring kAllScorings[] = {Scoring::Latent, Scoring::Yhat, Scoring::RegrYhat, Scoring::RegrX};

struct SessionState {
    std::vector<ItemId> administered;
    std::vector<ItemId> remaining; // ascending
    std::vector<ItemResponse> responses; // aligned with administered
    std::vector<double> yhat_history;    // aligned with administered
    LatentEstimate theta;
    Strategy strategy = Strategy::Alirt;
    Scoring scoring = Scoring::Latent;

    static SessionState start(std::span<const ItemId> items, Strategy strategy, Scoring scoring,
                              double theta0 = 0.0);

    bool exhausted() const { return remaining.empty(); }
    bool was_administered(ItemId item) const;
    bool is_remaining(ItemId item) const;
    ItemScoreVector administered_yhat() const;
};

/// Most informative remaining item at state.theta; ties go to the lowest id.
ItemId alirt_next(const GrmModel& model, const SessionState& state);

/// Moves `item` to administered, appends its level and y-hat, and re-estimates
/// theta from every administered response.
SessionState alirt_update(const LatentScorer& scorer, SessionState state, ItemId item, int level,
                          double yhat);

/// Mean of the administered items' predicted measures.
double ctt_score(const SessionState& state);

struct FixedOrders {
    std::vector<ItemId> forward;
    std::vector<ItemId> backward;
    std::vector<double> correlations; // |r| per item, index j - 1
};

/// Forward: items by descending |r(level, measure)|. Backward: repeatedly drops
/// the weakest remaining item and reverses the drop order. Ties favour the
/// lower id in both orders. Items with no variance get r = 0.
FixedOrders fit_fixed_orders(const LevelMatrix& levels, const Eigen::VectorXd& measure);

/// Fisher-Yates permutation driven by a 64-bit Mersenne twister.
std::vector<ItemId> random_order(std::span<const ItemId> items, std::uint64_t seed);

/// Everything a session consults; shared read-only between sessions.
struct FittedModels {
    int items = 0;
    int levels = 0;
    ItemModels item_models;
    ThresholdTable thresholds;
    std::shared_ptr<const LatentScorer> scorer;
    double theta0 = 0.0;
    FixedOrders fixed_orders;
    std::optional<ActorCriticModel> actor_critic;
    std::optional<RegressionTree> tree_latent; // features: polytomized levels
    std::optional<RegressionTree> tree_yhat;   // features: y-hat

    const GrmModel& grm() const;
    bool supports(Strategy strategy, Scoring scoring) const;
};

class Selector {
public:
    virtual ~Selector() = default;
    /// Throws NoItemsRemaining on an exhausted state.
    virtual ItemId next(const SessionState& state) const = 0;
};

/// `session_seed` only matters for the random strategy. The tree strategy uses
/// the level-feature tree under latent scoring and the y-hat tree otherwise.
std::unique_ptr<Selector> make_selector(const FittedModels& models, Strategy strategy, Scoring scoring,
                                        std::uint64_t session_seed);

/// Tree walk from the root: features already administered are followed by
/// their recorded value, the first unasked feature is the next item, and a
/// leaf (or an unanswerable feature) falls back to `fallback`.
ItemId tree_next(const RegressionTree& tree, bool level_features, std::span<const ItemId> fallback,
                 const SessionState& state);

/// Applies a response: ridge prediction, polytomization, theta update.
void administer(const FittedModels& models, SessionState& state, ItemId item, const Eigen::VectorXd& embedding);
void administer_yhat(const FittedModels& models, SessionState& state, ItemId item, double yhat);

/// Score under the session's paradigm for latent, y-hat and regr(y-hat).
/// Regr(X) needs the raw embeddings and is handled by the caller.
double session_score(const FittedModels& models, const SessionState& state, Scoring scoring);

} // namespace alba
