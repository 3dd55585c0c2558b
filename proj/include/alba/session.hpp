#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "alba/bundle.hpp"
#include "alba/strategies.hpp"

namespace alba {

struct SessionConfig {
    Strategy strategy = Strategy::Alirt;
    /// Reported paradigms; the first one also picks the tree variant.
    std::vector<Scoring> scorings{Scoring::Latent};
    int max_items = 5;
    std::uint64_t seed = 0; // random strategy only
};

/// "latent", "yhat", "regr_yhat", or "both" (latent and yhat).
std::vector<Scoring> parse_scorings(const std::string& name);

nlohmann::json to_json(const SessionConfig& c);
SessionConfig session_config_from_json(const nlohmann::json& j);

struct SessionStep {
    int step = 0;
    ItemId item = 0;
    std::vector<std::string> words;
    double yhat = 0.0; // item-level predicted measure
    int level = 0;
    std::optional<double> theta;
    std::optional<double> theta_sd;
    std::optional<double> yhat_score; // mean of item predictions so far
    std::optional<double> regr_yhat;
    std::optional<ItemId> next_item;
    bool done = false;
};

nlohmann::json estimates_json(const SessionStep& s);

/// One live assessment against a shared, read-only bundle.
class AssessmentSession {
public:
    AssessmentSession(std::shared_ptr<const ModelBundle> bundle, SessionConfig config);

    const SessionConfig& config() const { return config_; }
    const SessionState& state() const { return state_; }
    const std::vector<SessionStep>& steps() const { return steps_; }
    std::optional<ItemId> pending() const { return pending_; }
    bool done() const { return !pending_.has_value(); }

    /// Throws SessionDone, WrongItem, InvalidArgument (no words) or
    /// AllWordsOutOfVocabulary; the state is unchanged on error.
    const SessionStep& submit(ItemId item, std::span<const std::string> words);

    nlohmann::json snapshot() const;

private:
    std::shared_ptr<const ModelBundle> bundle_;
    SessionConfig config_;
    std::unique_ptr<Selector> selector_;
    SessionState state_;
    std::optional<ItemId> pending_;
    std::vector<SessionStep> steps_;
};

struct ReplayResult {
    std::size_t steps = 0;
    double max_theta_diff = 0.0;
    double max_yhat_diff = 0.0;
    bool items_match = true;
};

/// Reruns a jsonl transcript (a "create" line then "response" lines) through
/// the library and compares every reported estimate and next item.
ReplayResult replay_transcript(std::shared_ptr<const ModelBundle> bundle, const std::filesystem::path& path);

} // namespace alba
