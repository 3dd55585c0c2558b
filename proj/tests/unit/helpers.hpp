#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "alba/bundle.hpp"
#include "alba/cohort.hpp"
#include "alba/synthetic.hpp"

namespace testutil {

inline std::filesystem::path temp_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("alba_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::filesystem::path write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    return path;
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Model over the given item parameters with identity category maps.
inline alba::GrmModel model_from(const std::vector<alba::GrmItemParams>& params)
{
    alba::GrmModel m;
    m.levels = params.front().categories();
    for (std::size_t j = 0; j < params.size(); ++j) {
        alba::GrmItem item{params[j], {}};
        for (int k = 0; k <= params[j].categories(); ++k)
            item.category_map.push_back(k);
        m.items.emplace(static_cast<alba::ItemId>(j + 1), item);
    }
    return m;
}

inline alba::Cohort cohort_of(const alba::LanguageCohort& c, const std::string& measure = "phq9")
{
    return alba::build_cohort(c.records, c.bank, c.embedding, measure);
}

/// Small fitted bundle over a synthetic cohort, shared by session tests.
inline std::shared_ptr<const alba::ModelBundle> small_bundle(int respondents = 270, std::uint64_t seed = 5)
{
    alba::LanguageCohortSpec spec;
    spec.respondents = respondents;
    spec.seed = seed;
    const auto c = alba::simulate_language_cohort(spec);
    alba::FitConfig config;
    return std::make_shared<const alba::ModelBundle>(
        alba::fit_bundle(c.records, c.bank, c.embedding, "phq9", seed, config));
}

} // namespace testutil
