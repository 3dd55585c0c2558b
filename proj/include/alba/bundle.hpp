#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "json.hpp"

#include "alba/data_model.hpp"
#include "alba/embeddings.hpp"
#include "alba/evaluation.hpp"
#include "alba/strategies.hpp"

namespace alba {

/// Everything a live session needs: prompts, word vectors, and the fitted
/// models. Immutable once loaded.
struct ModelBundle {
    ItemBank bank;
    EmbeddingModel embedding;
    FittedModels models;
    std::string measure;
    std::uint64_t seed = 0;
    std::size_t respondents = 0;
};

nlohmann::json bundle_to_json(const ModelBundle& bundle);
ModelBundle bundle_from_json(const nlohmann::json& j);

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::filesystem::path& path);

/// Fits on every respondent: the first rotation's poly folds for the ridge
/// models and thresholds, everything else (its train and test folds) for the
/// IRT model, fixed orders, trees and actor-critic.
ModelBundle fit_bundle(std::span<const RespondentRecord> records, const ItemBank& bank,
                       const EmbeddingModel& embedding, const std::string& measure, std::uint64_t seed,
                       const FitConfig& config, MissingPolicy missing = MissingPolicy::Reject);

nlohmann::json ridge_to_json(const RidgeModel& m);
RidgeModel ridge_from_json(const nlohmann::json& j);
nlohmann::json tree_to_json(const RegressionTree& tree);
RegressionTree tree_from_json(const nlohmann::json& j);
nlohmann::json grm_to_json(const GrmModel& model);
GrmModel grm_from_json(const nlohmann::json& j);
nlohmann::json actor_critic_to_json(const ActorCriticModel& model);
ActorCriticModel actor_critic_from_json(const nlohmann::json& j);

} // namespace alba
