#include "alba/service.hpp"

#include <cstdio>
#include <fstream>

#include "httplib.h"

namespace alba {

namespace {

using nlohmann::json;

json question_json(const ItemBank& bank, std::optional<ItemId> item)
{
    if (!item)
        return nullptr;
    const auto& d = bank.at(*item);
    return {{"item_id", d.item_id}, {"text", d.question_text}, {"min_words", d.min_words}};
}

std::vector<std::string> words_from(const json& body)
{
    if (!body.contains("words"))
        throw Error(Errc::InvalidArgument, "missing 'words'");
    const auto& w = body.at("words");
    if (w.is_string())
        return {w.get<std::string>()};
    if (!w.is_array())
        throw Error(Errc::InvalidArgument, "'words' must be a list of strings");
    std::vector<std::string> out;
    for (const auto& e : w) {
        if (!e.is_string())
            throw Error(Errc::InvalidArgument, "'words' must be a list of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

void reply(httplib::Response& res, const ApiResponse& r)
{
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

json parse_body(const httplib::Request& req)
{
    if (req.body.empty())
        return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::exception&) {
        throw Error(Errc::InvalidArgument, "request body is not valid json");
    }
}

template <typename F>
void guarded(httplib::Response& res, F&& f)
{
    try {
        reply(res, f());
    } catch (const Error& e) {
        reply(res, error_response(e));
    } catch (const json::exception& e) {
        reply(res, error_response(Error(Errc::InvalidArgument, e.what())));
    }
}

} // namespace

int http_status(Errc code)
{
    switch (code) {
    case Errc::SessionNotFound:
        return 404;
    case Errc::SessionDone:
    case Errc::WrongItem:
        return 409;
    case Errc::AllWordsOutOfVocabulary:
        return 422;
    case Errc::BundleNotLoaded:
        return 503;
    case Errc::Io:
        return 500;
    default:
        return 400;
    }
}

ApiResponse error_response(const Error& e)
{
    return {http_status(e.code()), {{"code", errc_name(e.code())}, {"message", e.what()}}};
}

AssessmentService::AssessmentService(std::shared_ptr<const ModelBundle> bundle, ServiceOptions options)
    : bundle_(std::move(bundle)), options_(std::move(options)), rng_(std::random_device{}())
{
    if (!bundle_)
        throw Error(Errc::BundleNotLoaded, "no model bundle loaded");
    if (options_.transcript_dir)
        std::filesystem::create_directories(*options_.transcript_dir);
}

std::string AssessmentService::new_id()
{
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng_()),
                  static_cast<unsigned long long>(rng_()));
    return buf;
}

void AssessmentService::append(const Entry& e, const json& line) const
{
    if (!e.transcript)
        return;
    std::ofstream out(*e.transcript, std::ios::app | std::ios::binary);
    if (!out)
        throw Error(Errc::Io, "cannot append to " + e.transcript->string());
    out << line.dump() << '\n';
}

std::shared_ptr<AssessmentService::Entry> AssessmentService::find(const std::string& id)
{
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end())
        throw Error(Errc::SessionNotFound, "no session '" + id + "'");
    return it->second;
}

ApiResponse AssessmentService::create_session(const json& request)
{
    try {
        if (!request.is_object() && !request.is_null())
            throw Error(Errc::InvalidArgument, "body must be a json object");
        const json body = request.is_null() ? json::object() : request;
        SessionConfig config;
        config.strategy = parse_strategy(body.value("strategy", std::string("alirt")));
        config.scorings = parse_scorings(body.value("scoring", std::string("latent")));
        config.max_items = body.value("max_items", 5);
        std::string id;
        {
            std::lock_guard lock(mutex_);
            id = new_id();
            config.seed = body.contains("seed") ? body.at("seed").get<std::uint64_t>() : rng_();
        }
        auto entry = std::make_shared<Entry>();
        entry->session = std::make_unique<AssessmentSession>(bundle_, config);
        entry->created = entry->last_active = options_.clock();
        if (options_.transcript_dir)
            entry->transcript = *options_.transcript_dir / (id + ".jsonl");
        const json question = question_json(bundle_->bank, entry->session->pending());
        append(*entry, {{"event", "create"},
                        {"session_id", id},
                        {"config", to_json(entry->session->config())},
                        {"question", question}});
        {
            std::lock_guard lock(mutex_);
            sessions_.emplace(id, entry);
        }
        return {201, {{"session_id", id}, {"question", question}, {"config", to_json(entry->session->config())}}};
    } catch (const Error& e) {
        return error_response(e);
    } catch (const json::exception& e) {
        return error_response(Error(Errc::InvalidArgument, e.what()));
    }
}

ApiResponse AssessmentService::submit_response(const std::string& session_id, const json& body)
{
    try {
        auto entry = find(session_id);
        if (!body.is_object() || !body.contains("item_id"))
            throw Error(Errc::InvalidArgument, "body needs item_id and words");
        const auto item = body.at("item_id").get<ItemId>();
        const auto words = words_from(body);
        std::lock_guard lock(entry->mutex);
        const auto& s = entry->session->submit(item, words);
        entry->last_active = options_.clock();
        json out = {{"step", s.step},
                    {"estimates", estimates_json(s)},
                    {"question", question_json(bundle_->bank, s.next_item)},
                    {"done", s.done}};
        json line = out;
        line["event"] = "response";
        line["item_id"] = s.item;
        line["words"] = s.words;
        append(*entry, line);
        return {200, out};
    } catch (const Error& e) {
        return error_response(e);
    } catch (const json::exception& e) {
        return error_response(Error(Errc::InvalidArgument, e.what()));
    }
}

ApiResponse AssessmentService::get_session(const std::string& session_id)
{
    try {
        auto entry = find(session_id);
        std::lock_guard lock(entry->mutex);
        json snap = entry->session->snapshot();
        snap["session_id"] = session_id;
        return {200, snap};
    } catch (const Error& e) {
        return error_response(e);
    }
}

ApiResponse AssessmentService::items() const
{
    return {200, bundle_->bank};
}

ApiResponse AssessmentService::health() const
{
    const auto& m = bundle_->models;
    json strategies = json::array();
    for (auto s : kAllStrategies)
        if (m.supports(s, Scoring::Latent) || m.supports(s, Scoring::Yhat))
            strategies.push_back(strategy_name(s));
    return {200,
            {{"status", "ok"},
             {"items", m.items},
             {"levels", m.levels},
             {"measure", bundle_->measure},
             {"respondents", bundle_->respondents},
             {"strategies", strategies},
             {"sessions", session_count()},
             {"session_ttl", options_.session_ttl.count()}}};
}

std::size_t AssessmentService::expire_idle()
{
    const auto now = options_.clock();
    std::lock_guard lock(mutex_);
    std::size_t dropped = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        bool idle;
        {
            std::lock_guard entry_lock(it->second->mutex);
            idle = now - it->second->last_active > options_.session_ttl;
        }
        if (idle) {
            it = sessions_.erase(it);
            ++dropped;
        } else {
            ++it;
        }
    }
    return dropped;
}

std::size_t AssessmentService::session_count() const
{
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

void AssessmentService::mount(httplib::Server& server)
{
    server.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        expire_idle();
        guarded(res, [&] { return create_session(parse_body(req)); });
    });
    server.Post("/api/sessions/:id/responses", [this](const httplib::Request& req, httplib::Response& res) {
        expire_idle();
        guarded(res, [&] { return submit_response(req.path_params.at("id"), parse_body(req)); });
    });
    server.Get("/api/sessions/:id", [this](const httplib::Request& req, httplib::Response& res) {
        expire_idle();
        guarded(res, [&] { return get_session(req.path_params.at("id")); });
    });
    server.Get("/api/items", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { return items(); });
    });
    server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { return health(); });
    });
}

void serve(AssessmentService& service, const std::string& host, int port)
{
    httplib::Server server;
    service.mount(server);
    if (!server.listen(host, port))
        throw Error(Errc::Io, "cannot listen on " + host + ":" + std::to_string(port));
}

} // namespace alba
