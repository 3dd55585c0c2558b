#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "alba/data_model.hpp"
#include "alba/embeddings.hpp"
#include "alba/grm.hpp"
#include "alba/polytomize.hpp"

namespace alba {

/// alpha ~ U[0.5, 2.5]; betas equally spaced on [-2, 2], shifted by U[-0.5, 0.5].
std::vector<GrmItemParams> random_grm_items(int items, int levels, std::uint64_t seed);

struct GrmSimSpec {
    int respondents = 1000;
    std::vector<GrmItemParams> items;
    std::uint64_t seed = 1;
};

struct GrmSimulation {
    LevelMatrix levels; // respondents x items, 1..K
    Eigen::VectorXd theta;
};

/// theta ~ N(0, 1); each level drawn from the category probabilities.
GrmSimulation simulate_grm(const GrmSimSpec& spec);

struct LanguageCohortSpec {
    int respondents = 900;
    int items = 11;
    int dim = 10;
    /// Per-item length of the theta direction in embedding space; cycled when
    /// shorter than `items`.
    std::vector<double> signal{3.0, 2.0, 1.6, 1.2, 0.9, 0.7, 0.6, 0.5, 0.4, 0.35, 0.3};
    double noise_sd = 1.0;
    std::string measure = "phq9";
    double measure_intercept = 13.5;
    double measure_slope = 5.0;
    double measure_noise_sd = 2.0;
    double measure_min = 0.0;
    double measure_max = 27.0;
    std::uint64_t seed = 1;
};

/// Only item 1 carries signal.
LanguageCohortSpec planted_cohort_spec(int respondents, std::uint64_t seed);

struct LanguageCohort {
    std::vector<RespondentRecord> records;
    EmbeddingModel embedding;
    ItemBank bank;
    Eigen::VectorXd theta;
};

/// Response vector for (respondent, item) = offset_j + theta * signal_j * u_j
/// + noise, u_j a random unit direction. Each response is a single unique
/// token whose table row is that vector, so embed_response returns it exactly.
/// Measure = clamp(intercept + slope * theta + noise).
LanguageCohort simulate_language_cohort(const LanguageCohortSpec& spec);

/// Synthetic prompts for J items: the reference prompts when J = 11.
ItemBank synthetic_bank(int items);

} // namespace alba
