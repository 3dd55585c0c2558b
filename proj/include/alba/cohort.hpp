#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "alba/data_model.hpp"
#include "alba/embeddings.hpp"

namespace alba {

/// Respondents with their responses already embedded: the numeric view every
/// fitting stage consumes. Item j lives at index j - 1.
struct Cohort {
    std::vector<std::string> ids;
    std::vector<Eigen::MatrixXd> embeddings; // per item: n x d (rows of unanswered items are zero)
    std::vector<std::vector<char>> answered; // per item, per respondent
    Eigen::VectorXd measure;

    std::size_t size() const { return ids.size(); }
    int item_count() const { return static_cast<int>(embeddings.size()); }
    int dim() const { return embeddings.empty() ? 0 : static_cast<int>(embeddings.front().cols()); }
    bool has(std::size_t respondent, ItemId item) const
    {
        return answered[static_cast<std::size_t>(item - 1)][respondent] != 0;
    }
    Eigen::VectorXd embedding(std::size_t respondent, ItemId item) const
    {
        return embeddings[static_cast<std::size_t>(item - 1)].row(static_cast<Eigen::Index>(respondent)).transpose();
    }
    bool complete(std::size_t respondent) const;
};

/// Embeds every response; rows are ordered by respondent id. A response whose words are all out of vocabulary
/// counts as unanswered; under MissingPolicy::Reject that is an error.
Cohort build_cohort(std::span<const RespondentRecord> records, const ItemBank& bank,
                    const EmbeddingModel& embedding, const std::string& measure,
                    MissingPolicy policy = MissingPolicy::Reject);

} // namespace alba
