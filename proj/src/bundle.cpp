#include "alba/bundle.hpp"

#include <fstream>

#include "alba/cohort.hpp"
#include "alba/error.hpp"

namespace alba {

namespace {

using nlohmann::json;

constexpr int kBundleVersion = 1;

json vector_json(const Eigen::VectorXd& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from(const json& j)
{
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string provenance_name(EmbeddingProvenance p)
{
    switch (p) {
    case EmbeddingProvenance::Lsa:
        return "lsa";
    case EmbeddingProvenance::Projected:
        return "projected";
    case EmbeddingProvenance::Table:
        break;
    }
    return "table";
}

EmbeddingProvenance provenance_from(const std::string& s)
{
    if (s == "lsa")
        return EmbeddingProvenance::Lsa;
    if (s == "projected")
        return EmbeddingProvenance::Projected;
    return EmbeddingProvenance::Table;
}

json embedding_to_json(const EmbeddingModel& e)
{
    json vectors = json::array();
    for (Eigen::Index i = 0; i < e.vectors().rows(); ++i)
        vectors.push_back(vector_json(e.vectors().row(i).transpose()));
    return {{"dim", e.dim()}, {"provenance", provenance_name(e.provenance())}, {"words", e.words()},
            {"vectors", vectors}};
}

EmbeddingModel embedding_from_json(const json& j)
{
    auto words = j.at("words").get<std::vector<std::string>>();
    const int dim = j.at("dim").get<int>();
    const auto& rows = j.at("vectors");
    if (rows.size() != words.size())
        throw Error(Errc::InvalidArgument, "embedding words and vectors differ in length");
    Eigen::MatrixXd v(static_cast<Eigen::Index>(words.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = vector_from(rows[i]);
        if (r.size() != dim)
            throw Error(Errc::InvalidArgument, "embedding row of the wrong width");
        v.row(static_cast<Eigen::Index>(i)) = r.transpose();
    }
    return EmbeddingModel(std::move(words), std::move(v), provenance_from(j.value("provenance", "table")));
}

} // namespace

json ridge_to_json(const RidgeModel& m)
{
    return {{"weights", vector_json(m.weights)}, {"intercept", m.intercept}, {"lambda", m.lambda}};
}

RidgeModel ridge_from_json(const json& j)
{
    RidgeModel m;
    m.weights = vector_from(j.at("weights"));
    m.intercept = j.at("intercept").get<double>();
    m.lambda = j.value("lambda", 0.0);
    return m;
}

json tree_to_json(const RegressionTree& tree)
{
    json nodes = json::array();
    for (const auto& n : tree.nodes)
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value},
                         {"samples", n.samples}});
    return {{"nodes", nodes}};
}

RegressionTree tree_from_json(const json& j)
{
    RegressionTree t;
    for (const auto& n : j.at("nodes"))
        t.nodes.push_back({n.at("feature").get<ItemId>(), n.at("threshold").get<double>(), n.at("left").get<int>(),
                           n.at("right").get<int>(), n.at("value").get<double>(), n.value("samples", 0)});
    const auto count = static_cast<int>(t.nodes.size());
    for (const auto& n : t.nodes)
        if (!n.is_leaf() && (n.left < 0 || n.left >= count || n.right < 0 || n.right >= count))
            throw Error(Errc::InvalidArgument, "tree child index out of range");
    return t;
}

json grm_to_json(const GrmModel& model)
{
    json items = json::array();
    for (const auto& [id, item] : model.items)
        items.push_back({{"item_id", id},
                         {"alpha", item.params.alpha},
                         {"betas", item.params.betas},
                         {"category_map", item.category_map}});
    const auto& f = model.fit_meta;
    return {{"levels", model.levels},
            {"quadrature_points", model.quadrature.points},
            {"items", items},
            {"fit",
             {{"cycles", f.cycles},
              {"tol", f.tol},
              {"max_cycles", f.max_cycles},
              {"converged", f.converged},
              {"loglik", f.loglik}}}};
}

GrmModel grm_from_json(const json& j)
{
    GrmModel m;
    m.levels = j.at("levels").get<int>();
    m.quadrature = Quadrature::standard_normal(j.value("quadrature_points", 61));
    for (const auto& it : j.at("items")) {
        GrmItem item;
        item.params.alpha = it.at("alpha").get<double>();
        item.params.betas = it.at("betas").get<std::vector<double>>();
        item.category_map = it.at("category_map").get<std::vector<int>>();
        if (!item.params.valid())
            throw Error(Errc::InvalidArgument, "invalid IRT item parameters in bundle");
        if (item.category_map.size() != static_cast<std::size_t>(m.levels) + 1)
            throw Error(Errc::InvalidArgument, "category map does not match K");
        m.items.emplace(it.at("item_id").get<ItemId>(), std::move(item));
    }
    if (j.contains("fit")) {
        const auto& f = j.at("fit");
        m.fit_meta.cycles = f.value("cycles", 0);
        m.fit_meta.tol = f.value("tol", 1e-4);
        m.fit_meta.max_cycles = f.value("max_cycles", 500);
        m.fit_meta.converged = f.value("converged", false);
        m.fit_meta.loglik = f.value("loglik", 0.0);
    }
    return m;
}

json actor_critic_to_json(const ActorCriticModel& model)
{
    json measure = json::array(), error = json::array();
    const ItemMask limit = ItemMask{1} << model.items();
    for (ItemMask set = 0; set < limit; ++set) {
        if (model.has_measure_model(set)) {
            json e = ridge_to_json(model.measure_model(set));
            e["set"] = items_of(set);
            measure.push_back(std::move(e));
        }
        for (ItemId c = 1; c <= model.items(); ++c)
            if (model.has_error_model(set, c)) {
                json e = ridge_to_json(model.error_model(set, c));
                e["set"] = items_of(set);
                e["candidate"] = c;
                error.push_back(std::move(e));
            }
    }
    return {{"items", model.items()}, {"measure_models", measure}, {"error_models", error}};
}

ActorCriticModel actor_critic_from_json(const json& j)
{
    ActorCriticModel model(j.at("items").get<int>());
    for (const auto& e : j.at("measure_models"))
        model.set_measure_model(mask_of(e.at("set").get<std::vector<ItemId>>()), ridge_from_json(e));
    for (const auto& e : j.at("error_models"))
        model.set_error_model(mask_of(e.at("set").get<std::vector<ItemId>>()), e.at("candidate").get<ItemId>(),
                              ridge_from_json(e));
    return model;
}

json bundle_to_json(const ModelBundle& b)
{
    const auto& m = b.models;
    json item_models = json::array();
    for (const auto& [id, model] : m.item_models) {
        json e = ridge_to_json(model);
        e["item_id"] = id;
        item_models.push_back(std::move(e));
    }
    json thresholds = json::object();
    for (const auto& [id, t] : m.thresholds.thresholds)
        thresholds[std::to_string(id)] = t;

    json out = {
        {"version", kBundleVersion},
        {"measure", b.measure},
        {"seed", b.seed},
        {"respondents", b.respondents},
        {"items", b.bank},
        {"embedding", embedding_to_json(b.embedding)},
        {"item_models", item_models},
        {"polytomize", {{"levels", m.thresholds.levels}, {"thresholds", thresholds}}},
        {"grm", grm_to_json(m.grm())},
        {"theta0", m.theta0},
        {"fixed_orders",
         {{"forward", m.fixed_orders.forward},
          {"backward", m.fixed_orders.backward},
          {"correlations", m.fixed_orders.correlations}}},
    };
    if (m.tree_latent)
        out["tree"] = tree_to_json(*m.tree_latent);
    if (m.tree_yhat)
        out["tree_yhat"] = tree_to_json(*m.tree_yhat);
    if (m.actor_critic)
        out["actor_critic"] = actor_critic_to_json(*m.actor_critic);
    return out;
}

ModelBundle bundle_from_json(const json& j)
{
    try {
        ModelBundle b;
        b.measure = j.value("measure", "");
        b.seed = j.value("seed", std::uint64_t{0});
        b.respondents = j.value("respondents", std::size_t{0});
        b.bank = j.at("items").get<ItemBank>();
        b.embedding = embedding_from_json(j.at("embedding"));
        auto& m = b.models;
        m.items = static_cast<int>(b.bank.size());
        for (const auto& e : j.at("item_models"))
            m.item_models.emplace(e.at("item_id").get<ItemId>(), ridge_from_json(e));
        const auto& poly = j.at("polytomize");
        m.thresholds.levels = poly.at("levels").get<int>();
        m.levels = m.thresholds.levels;
        for (const auto& [key, value] : poly.at("thresholds").items())
            m.thresholds.thresholds.emplace(std::stoi(key), value.get<std::vector<double>>());
        m.scorer = std::make_shared<const LatentScorer>(grm_from_json(j.at("grm")));
        m.theta0 = j.value("theta0", 0.0);
        const auto& fo = j.at("fixed_orders");
        m.fixed_orders.forward = fo.at("forward").get<std::vector<ItemId>>();
        m.fixed_orders.backward = fo.at("backward").get<std::vector<ItemId>>();
        m.fixed_orders.correlations = fo.value("correlations", std::vector<double>{});
        if (j.contains("tree"))
            m.tree_latent = tree_from_json(j.at("tree"));
        if (j.contains("tree_yhat"))
            m.tree_yhat = tree_from_json(j.at("tree_yhat"));
        if (j.contains("actor_critic"))
            m.actor_critic = actor_critic_from_json(j.at("actor_critic"));
        for (ItemId id = 1; id <= m.items; ++id)
            if (!m.item_models.count(id) || !m.thresholds.thresholds.count(id) || !m.grm().items.count(id))
                throw Error(Errc::InvalidArgument, "bundle lacks models for item " + std::to_string(id));
        return b;
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidArgument, std::string("malformed bundle: ") + e.what());
    }
}

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::Io, "cannot write " + path.string());
    out << bundle_to_json(bundle).dump() << '\n';
}

ModelBundle load_bundle(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::BundleNotLoaded, "cannot read bundle " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidArgument, std::string("bundle is not valid json: ") + e.what());
    }
    return bundle_from_json(j);
}

ModelBundle fit_bundle(std::span<const RespondentRecord> records, const ItemBank& bank,
                       const EmbeddingModel& embedding, const std::string& measure, std::uint64_t seed,
                       const FitConfig& config, MissingPolicy missing)
{
    const Cohort cohort = build_cohort(records, bank, embedding, measure, missing);
    const FoldPlan plan = make_splits(cohort.ids, seed);
    FitRows rows = rotation_rows(cohort, plan, 0);
    const int test_fold = plan.rotations[0].test_fold;
    for (std::size_t i = 0; i < cohort.size(); ++i)
        if (plan.fold(cohort.ids[i]) == test_fold) {
            rows.train.push_back(i);
            rows.error.push_back(i);
        }
    std::sort(rows.train.begin(), rows.train.end());
    std::sort(rows.error.begin(), rows.error.end());

    ModelBundle b;
    b.bank = bank;
    b.embedding = embedding;
    b.measure = measure;
    b.seed = seed;
    b.respondents = cohort.size();
    b.models = fit_models(cohort, rows, config).models;
    return b;
}

} // namespace alba
