#include "alba/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "alba/csv.hpp"
#include "alba/error.hpp"
#include "alba/stats.hpp"

namespace alba {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kSessionStream = 0xa5a5a5a55a5a5a5aULL;
constexpr double kRegrXLambda = 1.0;

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, std::span<const std::size_t> rows)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Eigen::MatrixXd levels_as_features(const LevelMatrix& levels)
{
    Eigen::MatrixXd out = levels.cast<double>();
    for (Eigen::Index i = 0; i < out.size(); ++i)
        if (out.data()[i] <= 0.0)
            out.data()[i] = kNaN;
    return out;
}

std::vector<std::size_t> iota_rows(std::size_t n)
{
    std::vector<std::size_t> r(n);
    std::iota(r.begin(), r.end(), 0);
    return r;
}

std::string missing_name(MissingPolicy p)
{
    return p == MissingPolicy::Reject ? "reject" : "drop_item";
}

nlohmann::json optional_json(const std::optional<double>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

// Ridge models on concatenated embeddings, fit on demand per administered set.
class RegrXModels {
public:
    RegrXModels(const Cohort& cohort, std::span<const std::size_t> train) : cohort_(cohort), train_(train) {}

    double predict(const SessionState& state, std::size_t respondent)
    {
        const ItemMask mask = mask_of(state.administered);
        auto it = models_.find(mask);
        if (it == models_.end())
            it = models_.emplace(mask, fit(mask)).first;
        std::map<ItemId, Eigen::VectorXd> x;
        for (ItemId id : state.administered)
            x[id] = cohort_.embedding(respondent, id);
        return score_regr_x(x, it->second);
    }

private:
    SubsetModel fit(ItemMask mask) const
    {
        const auto items = items_of(mask);
        const int d = cohort_.dim();
        std::vector<std::size_t> rows;
        for (auto r : train_)
            if (std::all_of(items.begin(), items.end(), [&](ItemId id) { return cohort_.has(r, id); }))
                rows.push_back(r);
        if (rows.size() < 2)
            throw Error(Errc::InsufficientData, "too few complete rows for a regr_x model");
        Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(items.size()) * d);
        for (std::size_t k = 0; k < items.size(); ++k) {
            const auto& emb = cohort_.embeddings[static_cast<std::size_t>(items[k] - 1)];
            for (std::size_t i = 0; i < rows.size(); ++i)
                x.block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k) * d, 1, d) =
                    emb.row(static_cast<Eigen::Index>(rows[i]));
        }
        return {items, fit_ridge(x, take(cohort_.measure, rows), kRegrXLambda)};
    }

    const Cohort& cohort_;
    std::span<const std::size_t> train_;
    std::map<ItemMask, SubsetModel> models_;
};

struct FoldOutput {
    FoldSummary summary;
    std::vector<PredictionRow> predictions;
    std::map<std::pair<Strategy, Scoring>, SelectionFlow> flows;
};

// Scorings that share one administered sequence under `strategy`.
std::vector<std::vector<Scoring>> selection_groups(Strategy strategy, std::span<const Scoring> scorings)
{
    if (strategy != Strategy::Tree)
        return {std::vector<Scoring>(scorings.begin(), scorings.end())};
    std::vector<Scoring> latent, other;
    for (auto s : scorings)
        (s == Scoring::Latent ? latent : other).push_back(s);
    std::vector<std::vector<Scoring>> out;
    if (!latent.empty())
        out.push_back(latent);
    if (!other.empty())
        out.push_back(other);
    return out;
}

FoldOutput run_fold(const Cohort& cohort, const FoldPlan& plan, int rotation, const BenchmarkConfig& config)
{
    const int items = cohort.item_count();
    const FitRows rows = rotation_rows(cohort, plan, rotation);
    const int test_fold = plan.rotations[static_cast<std::size_t>(rotation)].test_fold;
    std::vector<std::size_t> test;
    std::set<std::string> test_ids;
    for (std::size_t i = 0; i < cohort.size(); ++i)
        if (plan.fold(cohort.ids[i]) == test_fold) {
            test.push_back(i);
            test_ids.insert(cohort.ids[i]);
        }

    FitAudit audit;
    const FoldFit fit = fit_models(cohort, rows, config.fit, &audit);
    const FittedModels& m = fit.models;

    FoldOutput out;
    auto& s = out.summary;
    s.fold = test_fold;
    s.poly = rows.poly.size();
    s.train = rows.train.size();
    s.test = test.size();
    s.grm = m.grm().fit_meta;
    s.grm_parameters = m.grm().parameter_count();
    if (m.actor_critic)
        s.actor_critic_parameters = m.actor_critic->parameter_count();
    if (m.tree_latent)
        s.tree_latent_parameters = m.tree_latent->parameter_count();
    if (m.tree_yhat)
        s.tree_yhat_parameters = m.tree_yhat->parameter_count();
    s.collapsed = fit.collapsed;
    for (const auto& [stage, ids] : audit.stages())
        s.audit_sizes[stage] = ids.size();
    s.audit_overlap = audit.overlapping(test_ids);

    for (auto strategy : config.strategies)
        for (auto scoring : config.scorings)
            out.flows[{strategy, scoring}] = SelectionFlow::Zero(items, items);

    const bool want_regr_x = std::find(config.scorings.begin(), config.scorings.end(), Scoring::RegrX) !=
                             config.scorings.end();
    std::optional<RegrXModels> regr_x;
    if (want_regr_x)
        regr_x.emplace(cohort, rows.train);

    for (auto t : test) {
        std::vector<ItemId> answered;
        std::map<ItemId, double> yhat;
        std::vector<ItemResponse> all;
        for (ItemId id = 1; id <= items; ++id) {
            if (!cohort.has(t, id))
                continue;
            answered.push_back(id);
            const double y = m.item_models.at(id).predict(cohort.embedding(t, id));
            yhat[id] = y;
            all.push_back({id, m.thresholds.level(id, y)});
        }
        if (answered.empty())
            continue;
        const double target_latent = m.scorer->estimate(all).theta;
        const double target_ctt = cohort.measure(static_cast<Eigen::Index>(t));
        const std::uint64_t session_seed = fold_hash(cohort.ids[t], config.seed ^ kSessionStream);

        for (auto strategy : config.strategies) {
            for (const auto& group : selection_groups(strategy, config.scorings)) {
                const auto selector = make_selector(m, strategy, group.front(), session_seed);
                auto state = SessionState::start(answered, strategy, group.front(), m.theta0);
                for (int step = 1; !state.exhausted(); ++step) {
                    const ItemId item = selector->next(state);
                    administer_yhat(m, state, item, yhat.at(item));
                    for (auto scoring : group) {
                        const double pred = scoring == Scoring::RegrX ? regr_x->predict(state, t)
                                                                      : session_score(m, state, scoring);
                        out.predictions.push_back({test_fold, cohort.ids[t], strategy, scoring, step, item, pred,
                                                   target_ctt, target_latent});
                        out.flows[{strategy, scoring}](step - 1, item - 1) += 1;
                    }
                }
            }
        }
    }
    return out;
}

std::optional<double> safe_r(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() < 2)
        return std::nullopt;
    try {
        return pearson_r(x, y);
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::string fmt(double v, const char* spec = "%.3f")
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

} // namespace

void FitAudit::record(const std::string& stage, const Cohort& cohort, std::span<const std::size_t> rows)
{
    auto& ids = stages_[stage];
    for (auto r : rows)
        ids.insert(cohort.ids[r]);
}

std::vector<std::string> FitAudit::overlapping(const std::set<std::string>& ids) const
{
    std::vector<std::string> out;
    for (const auto& [stage, seen] : stages_)
        for (const auto& id : ids)
            if (seen.count(id)) {
                out.push_back(stage);
                break;
            }
    return out;
}

FitRows rotation_rows(const Cohort& cohort, const FoldPlan& plan, int rotation)
{
    if (rotation < 0 || rotation >= kFoldCount)
        throw Error(Errc::InvalidArgument, "rotation out of range");
    const auto& split = plan.rotations[static_cast<std::size_t>(rotation)];
    FitRows rows;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        const int f = plan.fold(cohort.ids[i]);
        if (split.is_poly(f))
            rows.poly.push_back(i);
        if (split.is_train(f)) {
            rows.train.push_back(i);
            if (f == split.train_folds[0] || f == split.train_folds[1])
                rows.measure.push_back(i);
            else
                rows.error.push_back(i);
        }
    }
    return rows;
}

FoldFit fit_models(const Cohort& cohort, const FitRows& rows, const FitConfig& config, FitAudit* audit)
{
    const int items = cohort.item_count();
    if (rows.poly.empty() || rows.train.empty())
        throw Error(Errc::InsufficientData, "empty polytomization or training split");
    auto record = [&](const char* stage, std::span<const std::size_t> r) {
        if (audit)
            audit->record(stage, cohort, r);
    };

    FoldFit out;
    FittedModels& m = out.models;
    m.items = items;
    m.levels = config.levels;

    record("item_models", rows.poly);
    m.item_models = fit_item_models(cohort, rows.poly, config.ridge);
    const Eigen::MatrixXd yhat = predict_items(m.item_models, cohort);

    record("thresholds", rows.poly);
    std::map<ItemId, std::vector<double>> poly_pred;
    for (ItemId id = 1; id <= items; ++id) {
        auto& v = poly_pred[id];
        for (auto r : rows.poly) {
            const double y = yhat(static_cast<Eigen::Index>(r), id - 1);
            if (!std::isnan(y))
                v.push_back(y);
        }
    }
    m.thresholds = fit_thresholds(poly_pred, config.levels);

    const Eigen::MatrixXd yhat_train = take_rows(yhat, rows.train);
    const Eigen::VectorXd y_train = take(cohort.measure, rows.train);
    const LevelMatrix levels_train = polytomize(m.thresholds, yhat_train);
    out.collapsed = unobserved_levels(levels_train, config.levels, iota_rows(rows.train.size()));

    record("grm", rows.train);
    m.scorer = std::make_shared<const LatentScorer>(fit_grm(levels_train, config.levels, config.grm));

    record("fixed_orders", rows.train);
    m.fixed_orders = fit_fixed_orders(levels_train, y_train);

    if (config.theta0_from_train) {
        record("theta0", rows.train);
        double sum = 0.0;
        for (Eigen::Index i = 0; i < levels_train.rows(); ++i) {
            std::vector<ItemResponse> resp;
            for (Eigen::Index j = 0; j < levels_train.cols(); ++j)
                if (levels_train(i, j) > 0)
                    resp.push_back({static_cast<ItemId>(j + 1), levels_train(i, j)});
            sum += m.scorer->estimate(resp).theta;
        }
        m.theta0 = sum / static_cast<double>(levels_train.rows());
    }

    if (config.fit_trees) {
        record("tree", rows.train);
        m.tree_latent = fit_regression_tree(levels_as_features(levels_train), y_train, config.tree);
        m.tree_yhat = fit_regression_tree(yhat_train, y_train, config.tree);
    }

    if (config.fit_actor_critic) {
        if (rows.measure.empty() || rows.error.empty())
            throw Error(Errc::InsufficientData, "actor-critic needs non-empty measure and error splits");
        record("actor_critic_measure", rows.measure);
        record("actor_critic_error", rows.error);
        m.actor_critic = train_actor_critic(take_rows(yhat, rows.measure), take(cohort.measure, rows.measure),
                                            take_rows(yhat, rows.error), take(cohort.measure, rows.error),
                                            config.actor_critic);
    }
    return out;
}

std::string_view target_name(Target t)
{
    return t == Target::Ctt ? "ctt" : "latent_all";
}

std::vector<ResultCell> summarize(std::span<const PredictionRow> rows, std::span<const Strategy> strategies,
                                  std::span<const Scoring> scorings, int items)
{
    using Key = std::tuple<Strategy, Scoring, int>;
    std::map<Key, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < rows.size(); ++i)
        buckets[{rows[i].strategy, rows[i].scoring, rows[i].step}].push_back(i);

    std::vector<ResultCell> cells;
    for (auto strategy : strategies)
        for (auto scoring : scorings)
            for (auto target : {Target::Ctt, Target::LatentAll})
                for (int step = 1; step <= items; ++step) {
                    ResultCell c;
                    c.strategy = strategy;
                    c.scoring = scoring;
                    c.target = target;
                    c.n_items = step;
                    auto it = buckets.find({strategy, scoring, step});
                    if (it != buckets.end()) {
                        std::vector<double> pred, truth;
                        std::array<std::vector<double>, kFoldCount> fp, ft;
                        for (auto i : it->second) {
                            const auto& r = rows[i];
                            const double y = target == Target::Ctt ? r.target_ctt : r.target_latent;
                            pred.push_back(r.prediction);
                            truth.push_back(y);
                            if (r.fold >= 0 && r.fold < kFoldCount) {
                                fp[static_cast<std::size_t>(r.fold)].push_back(r.prediction);
                                ft[static_cast<std::size_t>(r.fold)].push_back(y);
                            }
                        }
                        c.n = pred.size();
                        c.r = safe_r(pred, truth);
                        c.rmse = rmse(pred, truth);
                        for (std::size_t f = 0; f < kFoldCount; ++f)
                            c.per_fold[f] = safe_r(fp[f], ft[f]);
                    }
                    cells.push_back(c);
                }
    return cells;
}

EvaluationReport run_benchmark(const Cohort& cohort, const BenchmarkConfig& input)
{
    BenchmarkConfig config = input;
    if (config.strategies.empty() || config.scorings.empty())
        throw Error(Errc::InvalidArgument, "no strategies or scorings requested");
    auto has_strategy = [&](Strategy s) {
        return std::find(config.strategies.begin(), config.strategies.end(), s) != config.strategies.end();
    };
    auto has_scoring = [&](Scoring s) {
        return std::find(config.scorings.begin(), config.scorings.end(), s) != config.scorings.end();
    };
    config.fit.fit_actor_critic = has_strategy(Strategy::ActorCritic) || has_scoring(Scoring::RegrYhat);
    config.fit.fit_trees = has_strategy(Strategy::Tree);

    const FoldPlan plan = make_splits(cohort.ids, config.seed);
    std::vector<FoldOutput> outputs(kFoldCount);
    std::vector<std::exception_ptr> errors(kFoldCount);

#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < kFoldCount; ++r) {
        try {
            outputs[static_cast<std::size_t>(r)] = run_fold(cohort, plan, r, config);
        } catch (...) {
            errors[static_cast<std::size_t>(r)] = std::current_exception();
        }
    }
    for (int r = 0; r < kFoldCount; ++r) {
        if (!errors[static_cast<std::size_t>(r)])
            continue;
        try {
            std::rethrow_exception(errors[static_cast<std::size_t>(r)]);
        } catch (const Error& e) {
            throw Error(e.code(), "fold " + std::to_string(plan.rotations[static_cast<std::size_t>(r)].test_fold) +
                                      ": " + e.what());
        }
    }

    EvaluationReport report;
    report.config = config;
    report.respondents = cohort.size();
    report.items = cohort.item_count();
    for (auto& o : outputs) {
        report.folds.push_back(o.summary);
        report.predictions.insert(report.predictions.end(), std::make_move_iterator(o.predictions.begin()),
                                  std::make_move_iterator(o.predictions.end()));
        for (auto& [key, flow] : o.flows) {
            auto it = report.flows.find(key);
            if (it == report.flows.end())
                report.flows.emplace(key, flow);
            else
                it->second += flow;
        }
    }
    report.cells = summarize(report.predictions, config.strategies, config.scorings, report.items);
    return report;
}

EvaluationReport run_benchmark(std::span<const RespondentRecord> records, const ItemBank& bank,
                               const EmbeddingModel& embedding, const BenchmarkConfig& config)
{
    const Cohort cohort = build_cohort(records, bank, embedding, config.measure, config.missing);
    return run_benchmark(cohort, config);
}

const ResultCell& EvaluationReport::cell(Strategy s, Scoring sc, Target t, int n_items) const
{
    for (const auto& c : cells)
        if (c.strategy == s && c.scoring == sc && c.target == t && c.n_items == n_items)
            return c;
    throw Error(Errc::InvalidArgument, "no such result cell");
}

bool EvaluationReport::leakage_free() const
{
    return std::all_of(folds.begin(), folds.end(), [](const FoldSummary& f) { return f.audit_overlap.empty(); });
}

nlohmann::json EvaluationReport::to_json() const
{
    using nlohmann::json;
    json meta = {
        {"seed", config.seed},
        {"levels", config.fit.levels},
        {"items", items},
        {"respondents", respondents},
        {"measure", config.measure},
        {"missing", missing_name(config.missing)},
        {"folds", kFoldCount},
        {"theta0_from_train", config.fit.theta0_from_train},
    };
    json strategies = json::array(), scorings = json::array();
    for (auto s : config.strategies)
        strategies.push_back(strategy_name(s));
    for (auto s : config.scorings)
        scorings.push_back(scoring_name(s));
    meta["strategies"] = strategies;
    meta["scorings"] = scorings;

    json results = json::array();
    for (const auto& c : cells) {
        json per_fold = json::array();
        for (const auto& v : c.per_fold)
            per_fold.push_back(optional_json(v));
        results.push_back({
            {"strategy", strategy_name(c.strategy)},
            {"scoring", scoring_name(c.scoring)},
            {"target", target_name(c.target)},
            {"n_items", c.n_items},
            {"n", c.n},
            {"r", optional_json(c.r)},
            {"r2", c.r ? json(*c.r * *c.r) : json(nullptr)},
            {"rmse", optional_json(c.rmse)},
            {"per_fold", per_fold},
        });
    }

    json flows_json = json::array();
    for (const auto& [key, flow] : flows) {
        json counts = json::array();
        for (Eigen::Index step = 0; step < flow.rows(); ++step) {
            json row = json::array();
            for (Eigen::Index j = 0; j < flow.cols(); ++j)
                row.push_back(flow(step, j));
            counts.push_back(row);
        }
        flows_json.push_back({{"strategy", strategy_name(key.first)},
                              {"scoring", scoring_name(key.second)},
                              {"counts", counts}});
    }

    json folds_json = json::array();
    for (const auto& f : folds) {
        json collapsed = json::object();
        for (const auto& [item, lv] : f.collapsed)
            collapsed[std::to_string(item)] = lv;
        folds_json.push_back({
            {"fold", f.fold},
            {"poly", f.poly},
            {"train", f.train},
            {"test", f.test},
            {"grm",
             {{"cycles", f.grm.cycles},
              {"converged", f.grm.converged},
              {"loglik", f.grm.loglik},
              {"parameters", f.grm_parameters}}},
            {"actor_critic_parameters", f.actor_critic_parameters},
            {"tree_parameters", {{"latent", f.tree_latent_parameters}, {"yhat", f.tree_yhat_parameters}}},
            {"collapsed_levels", collapsed},
            {"audit", f.audit_sizes},
            {"audit_overlap", f.audit_overlap},
        });
    }

    return {{"meta", meta},
            {"results", results},
            {"selection_flow", flows_json},
            {"folds", folds_json},
            {"leakage_free", leakage_free()}};
}

std::string EvaluationReport::text_table() const
{
    std::ostringstream out;
    for (auto target : {Target::Ctt, Target::LatentAll}) {
        out << "Pearson r against " << (target == Target::Ctt ? config.measure : std::string("latent (all items)"))
            << ", pooled over " << kFoldCount << " test folds (n = " << respondents << ", K = " << config.fit.levels
            << ")\n";
        char head[64];
        std::snprintf(head, sizeof head, "%-14s%-11s", "strategy", "scoring");
        out << head;
        for (int k = 1; k <= items; ++k)
            out << std::string(k < 10 ? 6 : 5, ' ') << k;
        out << '\n';
        for (auto s : config.strategies)
            for (auto sc : config.scorings) {
                char lead[64];
                std::snprintf(lead, sizeof lead, "%-14s%-11s", std::string(strategy_name(s)).c_str(),
                              std::string(scoring_name(sc)).c_str());
                out << lead;
                for (int k = 1; k <= items; ++k) {
                    const auto& c = cell(s, sc, target, k);
                    out << (c.r ? fmt(*c.r, "%7.3f") : std::string("      -"));
                }
                out << '\n';
            }
        out << '\n';
    }
    return out.str();
}

void write_predictions(const std::filesystem::path& path, std::span<const PredictionRow> rows)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::Io, "cannot write " + path.string());
    out << "fold,respondent_id,strategy,scoring,step,item_id,prediction,target_ctt,target_latent\n";
    for (const auto& r : rows)
        out << r.fold << ',' << csv::escape(r.respondent_id) << ',' << strategy_name(r.strategy) << ','
            << scoring_name(r.scoring) << ',' << r.step << ',' << r.item << ',' << csv::format_double(r.prediction)
            << ',' << csv::format_double(r.target_ctt) << ',' << csv::format_double(r.target_latent) << '\n';
}

std::vector<PredictionRow> read_predictions(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::Io, "cannot read " + path.string());
    std::vector<PredictionRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (csv::read_line(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty())
            continue;
        std::vector<std::string> f;
        if (!csv::split_record(line, f) || f.size() != 9)
            throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) + ": expected 9 fields");
        try {
            rows.push_back({std::stoi(f[0]), f[1], parse_strategy(f[2]), parse_scoring(f[3]), std::stoi(f[4]),
                            std::stoi(f[5]), std::stod(f[6]), std::stod(f[7]), std::stod(f[8])});
        } catch (const std::logic_error&) {
            throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) + ": bad number");
        }
    }
    return rows;
}

void write_report(const std::filesystem::path& dir, const EvaluationReport& report)
{
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "report.json", std::ios::binary);
        if (!out)
            throw Error(Errc::Io, "cannot write report.json");
        out << report.to_json().dump(2) << '\n';
    }
    {
        std::ofstream out(dir / "report.txt", std::ios::binary);
        out << report.text_table();
    }
    write_predictions(dir / "predictions.csv", report.predictions);
    {
        std::ofstream out(dir / "selection_flow.csv", std::ios::binary);
        out << "strategy,scoring,step,item_id,count\n";
        for (const auto& [key, flow] : report.flows)
            for (Eigen::Index step = 0; step < flow.rows(); ++step)
                for (Eigen::Index j = 0; j < flow.cols(); ++j)
                    out << strategy_name(key.first) << ',' << scoring_name(key.second) << ',' << step + 1 << ','
                        << j + 1 << ',' << flow(step, j) << '\n';
    }
}

nlohmann::json SweepResult::to_json() const
{
    nlohmann::json out = {{"strategy", strategy_name(strategy)}, {"scoring", scoring_name(scoring)}};
    nlohmann::json curves = nlohmann::json::array();
    for (int k : levels)
        curves.push_back({{"levels", k},
                          {"ctt", curve_ctt.at(k)},
                          {"latent_all", curve_latent.at(k)},
                          {"collapsed_levels", collapsed_levels.at(k)}});
    out["curves"] = curves;
    return out;
}

SweepResult discretization_sweep(const Cohort& cohort, std::span<const int> levels, BenchmarkConfig config,
                                 Strategy strategy, Scoring scoring)
{
    SweepResult out;
    out.strategy = strategy;
    out.scoring = scoring;
    config.strategies = {strategy};
    config.scorings = {scoring};
    for (int k : levels) {
        config.fit.levels = k;
        const auto report = run_benchmark(cohort, config);
        out.levels.push_back(k);
        auto& ctt = out.curve_ctt[k];
        auto& lat = out.curve_latent[k];
        for (int step = 1; step <= report.items; ++step) {
            ctt.push_back(report.cell(strategy, scoring, Target::Ctt, step).r.value_or(kNaN));
            lat.push_back(report.cell(strategy, scoring, Target::LatentAll, step).r.value_or(kNaN));
        }
        std::size_t collapsed = 0;
        for (const auto& f : report.folds)
            for (const auto& [item, lv] : f.collapsed)
                collapsed += lv.size();
        out.collapsed_levels[k] = collapsed;
    }
    return out;
}

} // namespace alba
