#include "alba/data_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "alba/csv.hpp"
#include "alba/error.hpp"

namespace alba {

namespace {

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::Io, "cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::Io, "cannot write " + path.string());
    return out;
}

[[noreturn]] void malformed(const std::filesystem::path& path, std::size_t line, const std::string& what)
{
    throw Error(Errc::MalformedRow,
                path.filename().string() + ":" + std::to_string(line) + ": " + what);
}

bool parse_int(std::string_view text, int& out)
{
    while (!text.empty() && text.front() == ' ')
        text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ')
        text.remove_suffix(1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

bool parse_real(std::string_view text, double& out)
{
    while (!text.empty() && text.front() == ' ')
        text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ')
        text.remove_suffix(1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

bool is_edge_punct(unsigned char c) { return std::ispunct(c) != 0; }

std::string join_words(const std::vector<std::string>& words)
{
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i)
            out.push_back(' ');
        out += words[i];
    }
    return out;
}

std::string quote_field(std::string_view field)
{
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace

ItemBank::ItemBank(std::vector<ItemDescriptor> items) : items_(std::move(items))
{
    std::sort(items_.begin(), items_.end(),
              [](const auto& a, const auto& b) { return a.item_id < b.item_id; });
    if (items_.size() < 2)
        throw Error(Errc::InvalidArgument, "item bank needs at least two items");
    for (std::size_t i = 0; i < items_.size(); ++i) {
        if (items_[i].item_id != static_cast<ItemId>(i + 1))
            throw Error(Errc::InvalidArgument, "item ids must be contiguous 1..J");
        if (items_[i].min_words < 1)
            throw Error(Errc::InvalidArgument, "min_words must be >= 1");
    }
}

const ItemDescriptor& ItemBank::at(ItemId id) const
{
    if (!contains(id))
        throw Error(Errc::UnknownItemId, "unknown item id " + std::to_string(id));
    return items_[static_cast<std::size_t>(id - 1)];
}

std::vector<ItemId> ItemBank::ids() const
{
    std::vector<ItemId> out(items_.size());
    std::iota(out.begin(), out.end(), 1);
    return out;
}

void to_json(nlohmann::json& j, const ItemBank& bank)
{
    j = nlohmann::json::array();
    for (const auto& item : bank.items())
        j.push_back({{"item_id", item.item_id},
                     {"question_text", item.question_text},
                     {"shorthand", item.shorthand},
                     {"min_words", item.min_words}});
}

void from_json(const nlohmann::json& j, ItemBank& bank)
{
    if (!j.is_array())
        throw Error(Errc::InvalidArgument, "item bank must be a json array");
    std::vector<ItemDescriptor> items;
    for (const auto& entry : j) {
        ItemDescriptor d;
        d.item_id = entry.at("item_id").get<int>();
        d.question_text = entry.value("question_text", std::string{});
        d.shorthand = entry.value("shorthand", std::string{});
        d.min_words = entry.value("min_words", 1);
        items.push_back(std::move(d));
    }
    bank = ItemBank(std::move(items));
}

ItemBank ItemBank::load(const std::filesystem::path& path)
{
    auto in = open_input(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedRow, path.string() + ": " + e.what());
    }
    return j.get<ItemBank>();
}

void ItemBank::save(const std::filesystem::path& path) const
{
    auto out = open_output(path);
    out << nlohmann::json(*this).dump(2) << '\n';
}

ItemBank ItemBank::default_bank()
{
    return ItemBank({
        {1, "Describe how you generally felt the last 2 weeks, that is, how you felt on average.",
         "Describe Mental Health", 5},
        {2, "Describe how you have been feeling about yourself over the last 2 weeks.",
         "Describe Yourself", 5},
        {3, "Over the last 2 weeks, have you been depressed or not?", "Describe Depression or Not", 5},
        {4, "Over the last 2 weeks, have you been worried or not?", "Describe Worry or Not", 5},
        {5, "Overall in your life, are you in harmony or not?", "Describe Harmony or Not", 5},
        {6, "Overall in your life, are you satisfied or not?", "Describe Satisfaction or Not", 5},
        {7,
         "Describe the nature of your physical movements over the last 2 weeks (have you for "
         "example been moving and speaking slowly; or the opposite, been fidgety and restless).",
         "Describe Movement", 5},
        {8, "Describe your sleep over the last 2 weeks.", "Describe Sleep", 5},
        {9, "Describe your concentration over the last 2 weeks.", "Describe Concentration", 5},
        {10, "Describe your appetite for food over the last 2 weeks.", "Describe Appetite", 5},
        {11, "Describe your energy level over the last 2 weeks.", "Describe Energy", 5},
    });
}

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
            ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])))
            ++j;
        std::size_t b = i, e = j;
        while (b < e && is_edge_punct(static_cast<unsigned char>(text[b])))
            ++b;
        while (e > b && is_edge_punct(static_cast<unsigned char>(text[e - 1])))
            --e;
        if (b < e) {
            std::string token(text.substr(b, e - b));
            for (char& c : token)
                c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            out.push_back(std::move(token));
        }
        i = j;
    }
    return out;
}

ResponseFormat format_from_path(const std::filesystem::path& path)
{
    const auto ext = path.extension().string();
    return (ext == ".jsonl" || ext == ".ndjson") ? ResponseFormat::Jsonl : ResponseFormat::Csv;
}

std::vector<RespondentRecord> load_responses(const std::filesystem::path& path,
                                             ResponseFormat format, const ItemBank& bank)
{
    auto in = open_input(path);
    std::vector<RespondentRecord> records;
    std::unordered_map<std::string, std::size_t> index;
    std::string line;
    std::size_t lineno = 0;

    auto check_item = [&](int item_id, std::size_t at) {
        if (!bank.contains(item_id))
            throw Error(Errc::UnknownItemId, path.filename().string() + ":" + std::to_string(at) +
                                                 ": unknown item id " + std::to_string(item_id));
    };

    if (format == ResponseFormat::Csv) {
        std::vector<std::string> fields;
        bool header_seen = false;
        while (csv::read_line(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t") == std::string::npos)
                continue;
            if (!csv::split_record(line, fields))
                malformed(path, lineno, "unterminated quote");
            if (!header_seen) {
                header_seen = true;
                if (fields.size() == 3 && fields[0] == "respondent_id")
                    continue;
            }
            if (fields.size() != 3)
                malformed(path, lineno, "expected 3 fields");
            int item_id = 0;
            if (!parse_int(fields[1], item_id))
                malformed(path, lineno, "item_id is not an integer");
            if (fields[0].empty())
                malformed(path, lineno, "empty respondent_id");
            check_item(item_id, lineno);
            auto words = tokenize(fields[2]);
            if (words.empty())
                malformed(path, lineno, "empty word list");
            auto [it, inserted] = index.try_emplace(fields[0], records.size());
            if (inserted)
                records.push_back(RespondentRecord{fields[0], {}, {}});
            auto& rec = records[it->second];
            if (!rec.responses.emplace(item_id, std::move(words)).second)
                throw Error(Errc::DuplicateRespondent,
                            path.filename().string() + ":" + std::to_string(lineno) +
                                ": respondent " + fields[0] + " answers item " +
                                std::to_string(item_id) + " twice");
        }
        return records;
    }

    while (csv::read_line(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            malformed(path, lineno, "invalid json");
        }
        if (!j.is_object() || !j.contains("respondent_id") || !j["respondent_id"].is_string())
            malformed(path, lineno, "missing respondent_id");
        RespondentRecord rec;
        rec.respondent_id = j["respondent_id"].get<std::string>();
        if (index.contains(rec.respondent_id))
            throw Error(Errc::DuplicateRespondent, path.filename().string() + ":" +
                                                       std::to_string(lineno) + ": duplicate respondent " +
                                                       rec.respondent_id);
        if (j.contains("responses")) {
            if (!j["responses"].is_object())
                malformed(path, lineno, "responses must be an object");
            for (const auto& [key, value] : j["responses"].items()) {
                int item_id = 0;
                if (!parse_int(key, item_id))
                    malformed(path, lineno, "item key is not an integer");
                check_item(item_id, lineno);
                std::vector<std::string> words;
                if (value.is_string()) {
                    words = tokenize(value.get<std::string>());
                } else if (value.is_array()) {
                    for (const auto& w : value) {
                        if (!w.is_string())
                            malformed(path, lineno, "words must be strings");
                        for (auto& t : tokenize(w.get<std::string>()))
                            words.push_back(std::move(t));
                    }
                } else {
                    malformed(path, lineno, "words must be a string or array");
                }
                if (words.empty())
                    malformed(path, lineno, "empty word list");
                rec.responses[item_id] = std::move(words);
            }
        }
        if (j.contains("measures")) {
            for (const auto& [name, value] : j["measures"].items()) {
                if (!value.is_number())
                    malformed(path, lineno, "measure must be numeric");
                rec.measures[name] = value.get<double>();
            }
        }
        index.emplace(rec.respondent_id, records.size());
        records.push_back(std::move(rec));
    }
    return records;
}

void save_responses(const std::filesystem::path& path, ResponseFormat format,
                    std::span<const RespondentRecord> records)
{
    auto out = open_output(path);
    if (format == ResponseFormat::Csv) {
        out << "respondent_id,item_id,words\n";
        for (const auto& rec : records)
            for (const auto& [item, words] : rec.responses)
                out << csv::escape(rec.respondent_id) << ',' << item << ','
                    << quote_field(join_words(words)) << '\n';
        return;
    }
    for (const auto& rec : records) {
        nlohmann::json j;
        j["respondent_id"] = rec.respondent_id;
        nlohmann::json responses = nlohmann::json::object();
        for (const auto& [item, words] : rec.responses)
            responses[std::to_string(item)] = words;
        j["responses"] = std::move(responses);
        nlohmann::json measures = nlohmann::json::object();
        for (const auto& [name, value] : rec.measures)
            measures[name] = value;
        j["measures"] = std::move(measures);
        out << j.dump() << '\n';
    }
}

void load_measures(const std::filesystem::path& path, std::vector<RespondentRecord>& records)
{
    auto in = open_input(path);
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < records.size(); ++i)
        index.emplace(records[i].respondent_id, i);

    std::string line;
    std::vector<std::string> fields;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (csv::read_line(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        if (!csv::split_record(line, fields))
            malformed(path, lineno, "unterminated quote");
        if (!header_seen) {
            header_seen = true;
            if (fields.size() == 3 && fields[0] == "respondent_id")
                continue;
        }
        if (fields.size() != 3)
            malformed(path, lineno, "expected 3 fields");
        double score = 0.0;
        if (!parse_real(fields[2], score))
            malformed(path, lineno, "score is not a finite number");
        auto it = index.find(fields[0]);
        if (it == index.end())
            malformed(path, lineno, "unknown respondent " + fields[0]);
        records[it->second].measures[fields[1]] = score;
    }
}

void save_measures(const std::filesystem::path& path, std::span<const RespondentRecord> records)
{
    auto out = open_output(path);
    out << "respondent_id,measure,score\n";
    for (const auto& rec : records)
        for (const auto& [name, value] : rec.measures)
            out << csv::escape(rec.respondent_id) << ',' << csv::escape(name) << ','
                << csv::format_double(value) << '\n';
}

void validate_records(std::span<const RespondentRecord> records, const ItemBank& bank,
                      const std::string& measure, MissingPolicy policy)
{
    for (const auto& rec : records) {
        for (const auto& [item, words] : rec.responses) {
            if (!bank.contains(item))
                throw Error(Errc::UnknownItemId, "respondent " + rec.respondent_id +
                                                     " references unknown item " + std::to_string(item));
            if (words.empty())
                throw Error(Errc::MalformedRow,
                            "respondent " + rec.respondent_id + " has an empty response");
        }
        if (!rec.measures.contains(measure))
            throw Error(Errc::IncompleteRecord,
                        "respondent " + rec.respondent_id + " lacks measure " + measure);
        if (policy == MissingPolicy::Reject && rec.responses.size() != bank.size())
            throw Error(Errc::IncompleteRecord, "respondent " + rec.respondent_id + " answered " +
                                                    std::to_string(rec.responses.size()) + " of " +
                                                    std::to_string(bank.size()) + " items");
        if (rec.responses.empty())
            throw Error(Errc::IncompleteRecord,
                        "respondent " + rec.respondent_id + " answered no items");
    }
}

bool DatasetSplit::is_poly(int fold) const
{
    return std::find(poly_folds.begin(), poly_folds.end(), fold) != poly_folds.end();
}

bool DatasetSplit::is_train(int fold) const
{
    return std::find(train_folds.begin(), train_folds.end(), fold) != train_folds.end();
}

int FoldPlan::fold(const std::string& respondent_id) const
{
    auto it = fold_of.find(respondent_id);
    if (it == fold_of.end())
        throw Error(Errc::InvalidArgument, "respondent " + respondent_id + " has no fold");
    return it->second;
}

std::uint64_t fold_hash(std::string_view respondent_id, std::uint64_t seed)
{
    // FNV-1a over the seed bytes then the id, finished with the splitmix64 mixer.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_byte = [&h](unsigned char b) {
        h ^= b;
        h *= 0x100000001b3ULL;
    };
    for (int i = 0; i < 8; ++i)
        mix_byte(static_cast<unsigned char>(seed >> (8 * i)));
    for (char c : respondent_id)
        mix_byte(static_cast<unsigned char>(c));
    h += 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
}

FoldPlan make_splits(std::span<const std::string> respondent_ids, std::uint64_t seed)
{
    if (respondent_ids.size() < static_cast<std::size_t>(kFoldCount))
        throw Error(Errc::TooFewRespondents, "need at least 9 respondents, got " +
                                                 std::to_string(respondent_ids.size()));
    std::vector<std::pair<std::uint64_t, std::string_view>> keyed;
    keyed.reserve(respondent_ids.size());
    for (const auto& id : respondent_ids)
        keyed.emplace_back(fold_hash(id, seed), id);
    std::sort(keyed.begin(), keyed.end());

    FoldPlan plan;
    plan.seed = seed;
    for (std::size_t rank = 0; rank < keyed.size(); ++rank) {
        const int fold = static_cast<int>(rank % kFoldCount);
        if (!plan.fold_of.emplace(std::string(keyed[rank].second), fold).second)
            throw Error(Errc::DuplicateRespondent,
                        "duplicate respondent " + std::string(keyed[rank].second));
        ++plan.fold_sizes[static_cast<std::size_t>(fold)];
    }
    for (int r = 0; r < kFoldCount; ++r) {
        auto& split = plan.rotations[static_cast<std::size_t>(r)];
        split.test_fold = r;
        for (int k = 0; k < 4; ++k) {
            split.poly_folds[static_cast<std::size_t>(k)] = (r + 1 + k) % kFoldCount;
            split.train_folds[static_cast<std::size_t>(k)] = (r + 5 + k) % kFoldCount;
        }
    }
    return plan;
}

FoldPlan make_splits(std::span<const RespondentRecord> records, std::uint64_t seed)
{
    std::vector<std::string> ids;
    ids.reserve(records.size());
    for (const auto& r : records)
        ids.push_back(r.respondent_id);
    return make_splits(ids, seed);
}

} // namespace alba
