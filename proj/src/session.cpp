#include "alba/session.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "alba/error.hpp"

namespace alba {

namespace {

bool wants(const SessionConfig& c, Scoring s)
{
    return std::find(c.scorings.begin(), c.scorings.end(), s) != c.scorings.end();
}

double diff(const std::optional<double>& a, const nlohmann::json& est, const char* key, bool& mismatch)
{
    const bool has = est.contains(key) && !est.at(key).is_null();
    if (a.has_value() != has) {
        mismatch = true;
        return 0.0;
    }
    return has ? std::abs(*a - est.at(key).get<double>()) : 0.0;
}

} // namespace

std::vector<Scoring> parse_scorings(const std::string& name)
{
    if (name == "both")
        return {Scoring::Latent, Scoring::Yhat};
    const Scoring s = parse_scoring(name);
    if (s == Scoring::RegrX)
        throw Error(Errc::UnknownScoring, "regr_x is only available in offline evaluation");
    return {s};
}

nlohmann::json to_json(const SessionConfig& c)
{
    nlohmann::json scorings = nlohmann::json::array();
    for (auto s : c.scorings)
        scorings.push_back(scoring_name(s));
    return {{"strategy", strategy_name(c.strategy)},
            {"scorings", scorings},
            {"max_items", c.max_items},
            {"seed", c.seed}};
}

SessionConfig session_config_from_json(const nlohmann::json& j)
{
    SessionConfig c;
    c.strategy = parse_strategy(j.at("strategy").get<std::string>());
    c.scorings.clear();
    for (const auto& s : j.at("scorings"))
        c.scorings.push_back(parse_scoring(s.get<std::string>()));
    c.max_items = j.value("max_items", 5);
    c.seed = j.value("seed", std::uint64_t{0});
    return c;
}

nlohmann::json estimates_json(const SessionStep& s)
{
    nlohmann::json e = nlohmann::json::object();
    if (s.theta) {
        e["theta"] = *s.theta;
        e["theta_sd"] = *s.theta_sd;
    }
    if (s.yhat_score)
        e["yhat"] = *s.yhat_score;
    if (s.regr_yhat)
        e["regr_yhat"] = *s.regr_yhat;
    return e;
}

AssessmentSession::AssessmentSession(std::shared_ptr<const ModelBundle> bundle, SessionConfig config)
    : bundle_(std::move(bundle)), config_(std::move(config))
{
    if (!bundle_)
        throw Error(Errc::BundleNotLoaded, "no model bundle loaded");
    if (config_.scorings.empty())
        throw Error(Errc::UnknownScoring, "no scoring requested");
    const auto& m = bundle_->models;
    for (auto s : config_.scorings)
        if (!m.supports(config_.strategy, s))
            throw Error(config_.strategy == Strategy::ActorCritic || config_.strategy == Strategy::Tree
                            ? Errc::UnknownStrategy
                            : Errc::UnknownScoring,
                        std::string(strategy_name(config_.strategy)) + "/" + std::string(scoring_name(s)) +
                            " is not available in the loaded bundle");
    if (config_.max_items < 1 || config_.max_items > m.items)
        config_.max_items = m.items;
    selector_ = make_selector(m, config_.strategy, config_.scorings.front(), config_.seed);
    state_ = SessionState::start(bundle_->bank.ids(), config_.strategy, config_.scorings.front(), m.theta0);
    pending_ = selector_->next(state_);
}

const SessionStep& AssessmentSession::submit(ItemId item, std::span<const std::string> words)
{
    if (!pending_)
        throw Error(Errc::SessionDone, "the session is finished");
    if (item != *pending_)
        throw Error(Errc::WrongItem, "expected a response to item " + std::to_string(*pending_) + ", got " +
                                         std::to_string(item));
    std::vector<std::string> tokens;
    for (const auto& w : words)
        for (auto& t : tokenize(w))
            tokens.push_back(std::move(t));
    if (tokens.empty())
        throw Error(Errc::InvalidArgument, "no words submitted");
    const Eigen::VectorXd x = embed_response(bundle_->embedding, tokens);

    const auto& m = bundle_->models;
    SessionState next = state_;
    const double yhat = m.item_models.at(item).predict(x);
    administer_yhat(m, next, item, yhat);

    SessionStep s;
    s.step = static_cast<int>(next.administered.size());
    s.item = item;
    s.words = std::move(tokens);
    s.yhat = yhat;
    s.level = next.responses.back().level;
    if (wants(config_, Scoring::Latent)) {
        s.theta = next.theta.theta;
        s.theta_sd = next.theta.posterior_sd;
    }
    if (wants(config_, Scoring::Yhat))
        s.yhat_score = ctt_score(next);
    if (wants(config_, Scoring::RegrYhat))
        s.regr_yhat = session_score(m, next, Scoring::RegrYhat);
    s.done = next.exhausted() || s.step >= config_.max_items;
    if (!s.done)
        s.next_item = selector_->next(next);

    state_ = std::move(next);
    pending_ = s.next_item;
    steps_.push_back(std::move(s));
    return steps_.back();
}

nlohmann::json AssessmentSession::snapshot() const
{
    nlohmann::json trajectory = nlohmann::json::array();
    for (const auto& s : steps_)
        trajectory.push_back({{"step", s.step},
                              {"item_id", s.item},
                              {"words", s.words},
                              {"item_yhat", s.yhat},
                              {"level", s.level},
                              {"estimates", estimates_json(s)}});
    nlohmann::json question = nullptr;
    if (pending_) {
        const auto& d = bundle_->bank.at(*pending_);
        question = {{"item_id", d.item_id}, {"text", d.question_text}, {"min_words", d.min_words}};
    }
    return {{"config", to_json(config_)},
            {"administered", state_.administered},
            {"remaining", state_.remaining},
            {"yhat_history", state_.yhat_history},
            {"theta", {{"theta", state_.theta.theta}, {"posterior_sd", state_.theta.posterior_sd}}},
            {"trajectory", trajectory},
            {"question", question},
            {"done", done()}};
}

ReplayResult replay_transcript(std::shared_ptr<const ModelBundle> bundle, const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::Io, "cannot read transcript " + path.string());
    ReplayResult out;
    std::unique_ptr<AssessmentSession> session;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto j = nlohmann::json::parse(line);
        const auto event = j.at("event").get<std::string>();
        if (event == "create") {
            session = std::make_unique<AssessmentSession>(bundle, session_config_from_json(j.at("config")));
            if (session->pending() != j.at("question").at("item_id").get<ItemId>())
                out.items_match = false;
            continue;
        }
        if (event != "response")
            continue;
        if (!session)
            throw Error(Errc::InvalidArgument, "transcript response before create");
        const auto words = j.at("words").get<std::vector<std::string>>();
        const auto& s = session->submit(j.at("item_id").get<ItemId>(), words);
        ++out.steps;
        bool mismatch = false;
        const auto& est = j.at("estimates");
        out.max_theta_diff = std::max(out.max_theta_diff, diff(s.theta, est, "theta", mismatch));
        out.max_yhat_diff = std::max(out.max_yhat_diff, diff(s.yhat_score, est, "yhat", mismatch));
        const auto& q = j.at("question");
        const std::optional<ItemId> expected =
            q.is_null() ? std::nullopt : std::optional<ItemId>(q.at("item_id").get<ItemId>());
        if (mismatch || expected != s.next_item || j.at("step").get<int>() != s.step)
            out.items_match = false;
    }
    return out;
}

} // namespace alba
