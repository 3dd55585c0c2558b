#include "alba/synthetic.hpp"

#include <algorithm>
#include <random>

#include "alba/error.hpp"

namespace alba {

namespace {

constexpr std::uint64_t kItemStream = 0x9e3779b97f4a7c15ULL;

int sample_category(const GrmItemParams& params, double theta, double u)
{
    const auto probs = category_probs(params, theta);
    double acc = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc)
            return static_cast<int>(k) + 1;
    }
    return static_cast<int>(probs.size());
}

std::string respondent_name(int i, int n)
{
    const int width = std::max(4, static_cast<int>(std::to_string(n).size()));
    std::string digits = std::to_string(i + 1);
    return "s" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') + digits;
}

} // namespace

std::vector<GrmItemParams> random_grm_items(int items, int levels, std::uint64_t seed)
{
    if (items < 1 || levels < 2)
        throw Error(Errc::InvalidArgument, "need >= 1 item and >= 2 levels");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> alpha(0.5, 2.5);
    std::uniform_real_distribution<double> shift(-0.5, 0.5);
    std::vector<GrmItemParams> out;
    for (int j = 0; j < items; ++j) {
        GrmItemParams p;
        p.alpha = alpha(rng);
        const double s = shift(rng);
        for (int k = 1; k < levels; ++k) {
            const double base = levels == 2 ? 0.0 : -2.0 + 4.0 * (k - 1) / (levels - 2);
            p.betas.push_back(base + s);
        }
        out.push_back(std::move(p));
    }
    return out;
}

GrmSimulation simulate_grm(const GrmSimSpec& spec)
{
    if (spec.respondents < 1 || spec.items.empty())
        throw Error(Errc::InvalidArgument, "empty simulation");
    for (const auto& p : spec.items)
        if (!p.valid())
            throw Error(Errc::InvalidArgument, "invalid item parameters");
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    GrmSimulation sim;
    sim.theta.resize(spec.respondents);
    for (int i = 0; i < spec.respondents; ++i)
        sim.theta(i) = normal(rng);
    const auto items = static_cast<Eigen::Index>(spec.items.size());
    sim.levels.resize(spec.respondents, items);
    for (int i = 0; i < spec.respondents; ++i)
        for (Eigen::Index j = 0; j < items; ++j)
            sim.levels(i, j) = sample_category(spec.items[static_cast<std::size_t>(j)], sim.theta(i), unif(rng));
    return sim;
}

LanguageCohortSpec planted_cohort_spec(int respondents, std::uint64_t seed)
{
    LanguageCohortSpec spec;
    spec.respondents = respondents;
    spec.signal.assign(static_cast<std::size_t>(spec.items), 0.0);
    spec.signal[0] = 3.0;
    spec.seed = seed;
    return spec;
}

ItemBank synthetic_bank(int items)
{
    if (items == 11) {
        auto bank = ItemBank::default_bank().items();
        for (auto& d : bank)
            d.min_words = 1;
        return ItemBank(std::move(bank));
    }
    std::vector<ItemDescriptor> d;
    for (int j = 1; j <= items; ++j)
        d.push_back({j, "Synthetic question " + std::to_string(j) + ".", "Q" + std::to_string(j), 1});
    return ItemBank(std::move(d));
}

LanguageCohort simulate_language_cohort(const LanguageCohortSpec& spec)
{
    if (spec.respondents < 1 || spec.items < 2 || spec.dim < 1 || spec.signal.empty() || spec.noise_sd < 0.0)
        throw Error(Errc::InvalidArgument, "invalid cohort spec");
    const int n = spec.respondents;
    const int items = spec.items;
    const int d = spec.dim;

    std::mt19937_64 item_rng(spec.seed ^ kItemStream);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Eigen::VectorXd> offset, direction;
    for (int j = 0; j < items; ++j) {
        Eigen::VectorXd o(d), u(d);
        for (int k = 0; k < d; ++k)
            o(k) = normal(item_rng);
        for (int k = 0; k < d; ++k)
            u(k) = normal(item_rng);
        offset.push_back(o);
        direction.push_back(u.normalized());
    }

    std::mt19937_64 rng(spec.seed);
    LanguageCohort out;
    out.bank = synthetic_bank(items);
    out.theta.resize(n);
    for (int i = 0; i < n; ++i)
        out.theta(i) = normal(rng);

    std::vector<std::string> words;
    Eigen::MatrixXd vectors(static_cast<Eigen::Index>(n) * items, d);
    out.records.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        RespondentRecord rec;
        rec.respondent_id = respondent_name(i, n);
        for (int j = 0; j < items; ++j) {
            const double signal = spec.signal[static_cast<std::size_t>(j) % spec.signal.size()];
            Eigen::VectorXd v = offset[static_cast<std::size_t>(j)] +
                                out.theta(i) * signal * direction[static_cast<std::size_t>(j)];
            for (int k = 0; k < d; ++k)
                v(k) += spec.noise_sd * normal(rng);
            const auto row = static_cast<Eigen::Index>(words.size());
            std::string token = "r" + std::to_string(i + 1) + "q" + std::to_string(j + 1);
            vectors.row(row) = v.transpose();
            words.push_back(token);
            rec.responses[j + 1] = {std::move(token)};
        }
        const double y = spec.measure_intercept + spec.measure_slope * out.theta(i) + spec.measure_noise_sd * normal(rng);
        rec.measures[spec.measure] = std::clamp(y, spec.measure_min, spec.measure_max);
        out.records.push_back(std::move(rec));
    }
    out.embedding = EmbeddingModel(std::move(words), std::move(vectors), EmbeddingProvenance::Table);
    return out;
}

} // namespace alba
