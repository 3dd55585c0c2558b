#include "alba/cohort.hpp"

#include <algorithm>
#include <numeric>

#include "alba/error.hpp"

namespace alba {

bool Cohort::complete(std::size_t respondent) const
{
    for (const auto& a : answered)
        if (!a[respondent])
            return false;
    return true;
}

Cohort build_cohort(std::span<const RespondentRecord> records, const ItemBank& bank,
                    const EmbeddingModel& embedding, const std::string& measure,
                    MissingPolicy policy)
{
    validate_records(records, bank, measure, policy);
    const auto n = static_cast<Eigen::Index>(records.size());
    const auto items = bank.size();
    Cohort c;
    c.ids.reserve(records.size());
    c.embeddings.assign(items, Eigen::MatrixXd::Zero(n, embedding.dim()));
    c.answered.assign(items, std::vector<char>(records.size(), 0));
    c.measure.resize(n);
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return records[a].respondent_id < records[b].respondent_id; });
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[order[i]];
        c.ids.push_back(rec.respondent_id);
        c.measure(static_cast<Eigen::Index>(i)) = rec.measures.at(measure);
        for (const auto& [item, words] : rec.responses) {
            try {
                c.embeddings[static_cast<std::size_t>(item - 1)].row(static_cast<Eigen::Index>(i)) =
                    embed_response(embedding, words).transpose();
                c.answered[static_cast<std::size_t>(item - 1)][i] = 1;
            } catch (const Error& e) {
                if (e.code() != Errc::AllWordsOutOfVocabulary || policy == MissingPolicy::Reject)
                    throw Error(e.code(), "respondent " + rec.respondent_id + ", item " +
                                              std::to_string(item) + ": " + e.what());
            }
        }
    }
    return c;
}

} // namespace alba
