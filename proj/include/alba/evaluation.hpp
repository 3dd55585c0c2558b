#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "alba/actor_critic.hpp"
#include "alba/cohort.hpp"
#include "alba/decision_tree.hpp"
#include "alba/grm.hpp"
#include "alba/item_scoring.hpp"
#include "alba/strategies.hpp"

namespace alba {

struct FitConfig {
    int levels = 8;
    RidgeCvOptions ridge;
    GrmFitOptions grm;
    TreeOptions tree;
    ActorCriticOptions actor_critic;
    bool fit_actor_critic = true;
    bool fit_trees = true;
    bool theta0_from_train = false; // otherwise 0, the prior mode
};

/// Cohort rows feeding each stage: ridge models and thresholds use `poly`;
/// the IRT model, fixed orders and trees use `train`; the actor-critic
/// measure models use `measure` and its error models `error`.
struct FitRows {
    std::vector<std::size_t> poly;
    std::vector<std::size_t> train;
    std::vector<std::size_t> measure;
    std::vector<std::size_t> error;
};

/// Respondent ids seen by every fitting stage.
class FitAudit {
public:
    void record(const std::string& stage, const Cohort& cohort, std::span<const std::size_t> rows);
    const std::map<std::string, std::set<std::string>>& stages() const { return stages_; }
    /// Stage names that saw any of `ids`.
    std::vector<std::string> overlapping(const std::set<std::string>& ids) const;

private:
    std::map<std::string, std::set<std::string>> stages_;
};

struct FoldFit {
    FittedModels models;
    std::map<ItemId, std::vector<int>> collapsed; // unobserved levels per item on the train rows
};

FoldFit fit_models(const Cohort& cohort, const FitRows& rows, const FitConfig& config, FitAudit* audit = nullptr);

/// Rows for one rotation of `plan`: poly / train folds, the actor-critic
/// measure models on the first two train folds and error models on the rest.
FitRows rotation_rows(const Cohort& cohort, const FoldPlan& plan, int rotation);

enum class Target { Ctt, LatentAll };
std::string_view target_name(Target t);

struct BenchmarkConfig {
    std::vector<Strategy> strategies{std::begin(kAllStrategies), std::end(kAllStrategies)};
    std::vector<Scoring> scorings{Scoring::Latent, Scoring::Yhat};
    std::uint64_t seed = 1;
    std::string measure = "phq9";
    MissingPolicy missing = MissingPolicy::Reject;
    FitConfig fit;
};

struct PredictionRow {
    int fold = 0;
    std::string respondent_id;
    Strategy strategy = Strategy::Alirt;
    Scoring scoring = Scoring::Latent;
    int step = 0; // 1-based count of administered items
    ItemId item = 0;
    double prediction = 0.0;
    double target_ctt = 0.0;
    double target_latent = 0.0;
};

struct ResultCell {
    Strategy strategy = Strategy::Alirt;
    Scoring scoring = Scoring::Latent;
    Target target = Target::Ctt;
    int n_items = 0;
    std::size_t n = 0;
    std::optional<double> r;
    std::optional<double> rmse;
    std::array<std::optional<double>, kFoldCount> per_fold{};
};

struct FoldSummary {
    int fold = 0;
    std::size_t poly = 0;
    std::size_t train = 0;
    std::size_t test = 0;
    GrmFitMeta grm;
    int grm_parameters = 0;
    std::uint64_t actor_critic_parameters = 0;
    int tree_latent_parameters = 0;
    int tree_yhat_parameters = 0;
    std::map<ItemId, std::vector<int>> collapsed;
    std::map<std::string, std::size_t> audit_sizes;
    std::vector<std::string> audit_overlap; // stages that saw a test id; empty when clean
};

/// Steps x items count of respondents administered each item at each step.
using SelectionFlow = Eigen::MatrixXi;

struct EvaluationReport {
    BenchmarkConfig config;
    std::size_t respondents = 0;
    int items = 0;
    std::vector<ResultCell> cells;
    std::map<std::pair<Strategy, Scoring>, SelectionFlow> flows;
    std::vector<FoldSummary> folds;
    std::vector<PredictionRow> predictions;

    const ResultCell& cell(Strategy s, Scoring sc, Target t, int n_items) const;
    bool leakage_free() const;

    nlohmann::json to_json() const;
    std::string text_table() const;
};

/// Pooled and per-fold correlations from prediction logs.
std::vector<ResultCell> summarize(std::span<const PredictionRow> rows, std::span<const Strategy> strategies,
                                  std::span<const Scoring> scorings, int items);

EvaluationReport run_benchmark(const Cohort& cohort, const BenchmarkConfig& config);
EvaluationReport run_benchmark(std::span<const RespondentRecord> records, const ItemBank& bank,
                               const EmbeddingModel& embedding, const BenchmarkConfig& config);

/// report.json, report.txt, predictions.csv, selection_flow.csv.
void write_report(const std::filesystem::path& dir, const EvaluationReport& report);
void write_predictions(const std::filesystem::path& path, std::span<const PredictionRow> rows);
std::vector<PredictionRow> read_predictions(const std::filesystem::path& path);

struct SweepResult {
    std::vector<int> levels;
    Strategy strategy = Strategy::Alirt;
    Scoring scoring = Scoring::Latent;
    std::map<int, std::vector<double>> curve_ctt;    // K -> r per step
    std::map<int, std::vector<double>> curve_latent; // K -> r per step
    std::map<int, std::size_t> collapsed_levels;     // K -> unobserved (fold, item, level) triples
    nlohmann::json to_json() const;
};

/// One benchmark per K on shared folds and seed.
SweepResult discretization_sweep(const Cohort& cohort, std::span<const int> levels, BenchmarkConfig config,
                                 Strategy strategy = Strategy::Alirt, Scoring scoring = Scoring::Latent);

} // namespace alba
