// alba: command-line front end for evaluation, simulation, fitting and the
// live assessment service.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "alba/bundle.hpp"
#include "alba/cohort.hpp"
#include "alba/csv.hpp"
#include "alba/diagnostics.hpp"
#include "alba/error.hpp"
#include "alba/evaluation.hpp"
#include "alba/service.hpp"
#include "alba/session.hpp"
#include "alba/synthetic.hpp"

namespace fs = std::filesystem;
using namespace alba;

namespace {

struct DataArgs {
    std::string responses;
    std::string measures;
    std::string items;
    std::string embeddings;
    std::string measure = "phq9";
    bool drop_missing = false;
};

void add_data_options(CLI::App* cmd, DataArgs& a)
{
    cmd->add_option("--responses", a.responses, "responses file (.csv or .jsonl)")->required();
    cmd->add_option("--measures", a.measures, "measures csv (respondent_id,measure,score)");
    cmd->add_option("--items", a.items, "item bank json (default: built-in prompts)");
    cmd->add_option("--embeddings", a.embeddings, "word vector table csv")->required();
    cmd->add_option("--measure", a.measure, "measure name to predict");
    cmd->add_flag("--drop-missing", a.drop_missing, "treat missing item responses as unanswered");
}

struct Data {
    ItemBank bank;
    EmbeddingModel embedding;
    std::vector<RespondentRecord> records;
};

Data load_data(const DataArgs& a)
{
    Data d;
    d.bank = a.items.empty() ? ItemBank::default_bank() : ItemBank::load(a.items);
    d.records = load_responses(a.responses, format_from_path(a.responses), d.bank);
    if (!a.measures.empty())
        load_measures(a.measures, d.records);
    d.embedding = EmbeddingModel::load_table(a.embeddings);
    return d;
}

MissingPolicy policy(const DataArgs& a)
{
    return a.drop_missing ? MissingPolicy::DropItem : MissingPolicy::Reject;
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string part;
    while (std::getline(in, part, ','))
        if (!part.empty())
            out.push_back(part);
    return out;
}

Eigen::MatrixXd read_matrix(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::Io, "cannot read " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::vector<std::string> fields;
    while (csv::read_line(in, line)) {
        if (line.empty() || !csv::split_record(line, fields))
            continue;
        std::vector<double> row;
        try {
            for (const auto& f : fields)
                row.push_back(std::stod(f));
        } catch (const std::logic_error&) {
            if (rows.empty())
                continue; // header
            throw Error(Errc::MalformedRow, "non-numeric matrix entry");
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw Error(Errc::MalformedRow, "ragged matrix");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw Error(Errc::InvalidArgument, "empty matrix");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

void write_json(const fs::path& path, const nlohmann::json& j)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::Io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive language-based assessment engine"};
    app.require_subcommand(1);

    // evaluate
    DataArgs eval_data;
    int eval_k = 8;
    std::uint64_t eval_seed = 1;
    std::string eval_strategies = "alirt,actor_critic,random,forward,backward,tree";
    std::string eval_scorings = "latent,yhat";
    std::string eval_out = "report";
    bool eval_theta0_train = false;
    auto* evaluate = app.add_subcommand("evaluate", "9-fold cross-validated benchmark");
    add_data_options(evaluate, eval_data);
    evaluate->add_option("--K", eval_k, "polytomization levels");
    evaluate->add_option("--seed", eval_seed, "fold and session seed");
    evaluate->add_option("--strategies", eval_strategies, "comma-separated strategies");
    evaluate->add_option("--scorings", eval_scorings, "comma-separated scorings");
    evaluate->add_option("--out", eval_out, "output directory");
    evaluate->add_flag("--theta0-from-train", eval_theta0_train, "start sessions at the train-split mean");

    // sweep
    DataArgs sweep_data;
    std::string sweep_levels = "2,4,8,12";
    std::uint64_t sweep_seed = 1;
    std::string sweep_out = "sweep.json";
    auto* sweep = app.add_subcommand("sweep", "r-vs-steps curves across polytomization levels");
    add_data_options(sweep, sweep_data);
    sweep->add_option("--levels", sweep_levels, "comma-separated K values");
    sweep->add_option("--seed", sweep_seed, "fold seed");
    sweep->add_option("--out", sweep_out, "output json");

    // simulate
    int sim_n = 900;
    std::uint64_t sim_seed = 1;
    double sim_noise = 1.0;
    bool sim_planted = false;
    std::string sim_out = "synthetic";
    auto* simulate = app.add_subcommand("simulate", "write a synthetic language cohort");
    simulate->add_option("--n", sim_n, "respondents");
    simulate->add_option("--seed", sim_seed, "generator seed");
    simulate->add_option("--noise", sim_noise, "embedding noise sd");
    simulate->add_flag("--planted", sim_planted, "only item 1 carries signal");
    simulate->add_option("--out", sim_out, "output directory");

    // fit
    DataArgs fit_data;
    int fit_k = 8;
    std::uint64_t fit_seed = 1;
    std::string fit_out = "bundle.json";
    auto* fit = app.add_subcommand("fit", "fit a model bundle for the service");
    add_data_options(fit, fit_data);
    fit->add_option("--K", fit_k, "polytomization levels");
    fit->add_option("--seed", fit_seed, "fold seed");
    fit->add_option("--out", fit_out, "bundle path");

    // serve
    std::string serve_bundle;
    int serve_port = 8080;
    std::string serve_host = "0.0.0.0";
    long serve_ttl = 1800;
    std::string serve_transcripts;
    auto* serve_cmd = app.add_subcommand("serve", "run the live assessment service");
    serve_cmd->add_option("--bundle", serve_bundle, "model bundle (env ALBA_BUNDLE)");
    serve_cmd->add_option("--port", serve_port, "port (env ALBA_PORT)");
    serve_cmd->add_option("--host", serve_host, "bind address");
    serve_cmd->add_option("--session-ttl", serve_ttl, "idle seconds before a session expires");
    serve_cmd->add_option("--transcripts", serve_transcripts, "directory for per-session jsonl transcripts");

    // diagnostics
    DataArgs diag_data;
    std::string diag_matrix;
    auto* diagnostics = app.add_subcommand("diagnostics", "KMO and Bartlett sphericity");
    diagnostics->add_option("--matrix", diag_matrix, "numeric csv, respondents x items");
    diagnostics->add_option("--responses", diag_data.responses, "responses file");
    diagnostics->add_option("--measures", diag_data.measures, "measures csv");
    diagnostics->add_option("--items", diag_data.items, "item bank json");
    diagnostics->add_option("--embeddings", diag_data.embeddings, "word vector table csv");
    diagnostics->add_option("--measure", diag_data.measure, "measure name");

    // replay
    std::string replay_bundle, replay_transcript_path;
    auto* replay = app.add_subcommand("replay", "rerun a session transcript through the library");
    replay->add_option("--bundle", replay_bundle, "model bundle")->required();
    replay->add_option("--transcript", replay_transcript_path, "jsonl transcript")->required();

    // embed
    std::string embed_corpus, embed_vectors, embed_out = "embeddings.csv";
    int embed_dim = 10, embed_rank = 0;
    auto* embed = app.add_subcommand("embed", "build word vectors: LSA over a corpus or PCA of given vectors");
    embed->add_option("--corpus", embed_corpus, "jsonl corpus for LSA");
    embed->add_option("--vectors", embed_vectors, "word vector table to project");
    embed->add_option("--dim", embed_dim, "output dimension");
    embed->add_option("--rank", embed_rank, "LSA rank (0: min(300, |V|, |docs|))");
    embed->add_option("--out", embed_out, "output table");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*evaluate) {
            const auto d = load_data(eval_data);
            BenchmarkConfig config;
            config.seed = eval_seed;
            config.measure = eval_data.measure;
            config.missing = policy(eval_data);
            config.fit.levels = eval_k;
            config.fit.theta0_from_train = eval_theta0_train;
            config.strategies.clear();
            for (const auto& s : split_list(eval_strategies))
                config.strategies.push_back(parse_strategy(s));
            config.scorings.clear();
            for (const auto& s : split_list(eval_scorings))
                config.scorings.push_back(parse_scoring(s));
            const auto report = run_benchmark(d.records, d.bank, d.embedding, config);
            write_report(eval_out, report);
            std::cout << report.text_table();
            std::cout << "leakage audit: " << (report.leakage_free() ? "clean" : "VIOLATED") << '\n';
            return report.leakage_free() ? 0 : 3;
        }
        if (*sweep) {
            const auto d = load_data(sweep_data);
            BenchmarkConfig config;
            config.seed = sweep_seed;
            config.measure = sweep_data.measure;
            config.missing = policy(sweep_data);
            std::vector<int> levels;
            for (const auto& s : split_list(sweep_levels))
                levels.push_back(std::stoi(s));
            const Cohort cohort = build_cohort(d.records, d.bank, d.embedding, config.measure, config.missing);
            const auto result = discretization_sweep(cohort, levels, config);
            write_json(sweep_out, result.to_json());
            for (int k : result.levels) {
                std::cout << "K=" << k << ':';
                for (double r : result.curve_ctt.at(k))
                    std::cout << ' ' << csv::format_double(std::round(r * 1000.0) / 1000.0);
                std::cout << '\n';
            }
            return 0;
        }
        if (*simulate) {
            auto spec = sim_planted ? planted_cohort_spec(sim_n, sim_seed) : LanguageCohortSpec{};
            spec.respondents = sim_n;
            spec.seed = sim_seed;
            spec.noise_sd = sim_noise;
            const auto cohort = simulate_language_cohort(spec);
            fs::create_directories(sim_out);
            save_responses(fs::path(sim_out) / "responses.csv", ResponseFormat::Csv, cohort.records);
            save_measures(fs::path(sim_out) / "measures.csv", cohort.records);
            cohort.bank.save(fs::path(sim_out) / "items.json");
            cohort.embedding.save_table(fs::path(sim_out) / "embeddings.csv");
            std::cout << "wrote " << cohort.records.size() << " respondents to " << sim_out << '\n';
            return 0;
        }
        if (*fit) {
            const auto d = load_data(fit_data);
            FitConfig config;
            config.levels = fit_k;
            const auto bundle =
                fit_bundle(d.records, d.bank, d.embedding, fit_data.measure, fit_seed, config, policy(fit_data));
            save_bundle(fit_out, bundle);
            std::cout << "wrote " << fit_out << " (" << bundle.respondents << " respondents, K=" << fit_k << ")\n";
            return 0;
        }
        if (*serve_cmd) {
            if (const char* env = std::getenv("ALBA_PORT"))
                serve_port = std::stoi(env);
            if (const char* env = std::getenv("ALBA_BUNDLE"))
                serve_bundle = env;
            if (serve_bundle.empty())
                throw Error(Errc::BundleNotLoaded, "no bundle given (--bundle or ALBA_BUNDLE)");
            auto bundle = std::make_shared<const ModelBundle>(load_bundle(serve_bundle));
            ServiceOptions options;
            options.session_ttl = std::chrono::seconds(serve_ttl);
            if (!serve_transcripts.empty())
                options.transcript_dir = serve_transcripts;
            AssessmentService service(bundle, options);
            std::cout << "serving " << serve_bundle << " on " << serve_host << ':' << serve_port << std::endl;
            serve(service, serve_host, serve_port);
            return 0;
        }
        if (*diagnostics) {
            Eigen::MatrixXd data;
            if (!diag_matrix.empty()) {
                data = read_matrix(diag_matrix);
            } else {
                if (diag_data.responses.empty() || diag_data.embeddings.empty())
                    throw Error(Errc::InvalidArgument, "give --matrix or --responses with --embeddings");
                const auto d = load_data(diag_data);
                const Cohort cohort = build_cohort(d.records, d.bank, d.embedding, diag_data.measure);
                std::vector<std::size_t> rows(cohort.size());
                std::iota(rows.begin(), rows.end(), 0);
                data = predict_items(fit_item_models(cohort, rows), cohort);
            }
            const double k = kmo(data);
            const auto b = bartlett_sphericity(data);
            nlohmann::json out = {{"n", data.rows()},
                                  {"items", data.cols()},
                                  {"kmo", k},
                                  {"bartlett", {{"statistic", b.statistic}, {"dof", b.dof}, {"p_value", b.p_value}}}};
            std::cout << out.dump(2) << '\n';
            return 0;
        }
        if (*replay) {
            auto bundle = std::make_shared<const ModelBundle>(load_bundle(replay_bundle));
            const auto r = replay_transcript(bundle, replay_transcript_path);
            nlohmann::json out = {{"steps", r.steps},
                                  {"max_theta_diff", r.max_theta_diff},
                                  {"max_yhat_diff", r.max_yhat_diff},
                                  {"items_match", r.items_match}};
            std::cout << out.dump(2) << '\n';
            const bool ok = r.items_match && r.max_theta_diff <= 1e-9 && r.max_yhat_diff <= 1e-9;
            return ok ? 0 : 4;
        }
        if (*embed) {
            if (embed_corpus.empty() == embed_vectors.empty())
                throw Error(Errc::InvalidArgument, "give exactly one of --corpus or --vectors");
            EmbeddingModel model;
            if (!embed_corpus.empty()) {
                LsaOptions options;
                options.dim = embed_dim;
                options.rank = embed_rank;
                model = fit_lsa(load_corpus(embed_corpus), options);
            } else {
                const auto input = EmbeddingModel::load_table(embed_vectors);
                model = project(input, fit_projection(input.vectors(), embed_dim));
            }
            model.save_table(embed_out);
            std::cout << "wrote " << model.vocabulary_size() << " words x " << model.dim() << " to " << embed_out
                      << '\n';
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
