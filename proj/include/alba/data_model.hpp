#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace alba {

using ItemId = int;

struct ItemDescriptor {
    ItemId item_id = 0;
    std::string question_text;
    std::string shorthand;
    int min_words = 1;
};

/// Ordered set of items with contiguous ids 1..J, J >= 2.
class ItemBank {
public:
    ItemBank() = default;
    explicit ItemBank(std::vector<ItemDescriptor> items);

    std::size_t size() const { return items_.size(); }
    bool contains(ItemId id) const { return id >= 1 && id <= static_cast<ItemId>(items_.size()); }
    const ItemDescriptor& at(ItemId id) const;
    const std::vector<ItemDescriptor>& items() const { return items_; }
    std::vector<ItemId> ids() const;

    static ItemBank load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    /// The eleven open-ended mental-health prompts used in the reference study.
    static ItemBank default_bank();

private:
    std::vector<ItemDescriptor> items_;
};

void to_json(nlohmann::json& j, const ItemBank& bank);
void from_json(const nlohmann::json& j, ItemBank& bank);

struct RespondentRecord {
    std::string respondent_id;
    std::map<ItemId, std::vector<std::string>> responses;
    std::map<std::string, double> measures;

    bool operator==(const RespondentRecord&) const = default;
};

/// Splits on whitespace, lowercases and strips punctuation at token edges.
/// Tokens that are pure punctuation are dropped.
std::vector<std::string> tokenize(std::string_view text);

enum class ResponseFormat { Csv, Jsonl };

ResponseFormat format_from_path(const std::filesystem::path& path);

/// Empty files yield an empty list. Row numbers in errors are 1-based file
/// lines.
std::vector<RespondentRecord> load_responses(const std::filesystem::path& path,
                                             ResponseFormat format,
                                             const ItemBank& bank);

void save_responses(const std::filesystem::path& path, ResponseFormat format,
                    std::span<const RespondentRecord> records);

/// Merges `respondent_id,measure,score` rows into the matching records.
/// Rows for unknown respondents are an error.
void load_measures(const std::filesystem::path& path, std::vector<RespondentRecord>& records);

void save_measures(const std::filesystem::path& path, std::span<const RespondentRecord> records);

enum class MissingPolicy {
    Reject,   ///< any record lacking an item response is an error
    DropItem, ///< keep the record; the missing item is treated as unanswered
};

/// Checks completeness against the bank and that every record carries
/// `measure`. Under Reject, a record missing any item throws IncompleteRecord.
void validate_records(std::span<const RespondentRecord> records, const ItemBank& bank,
                      const std::string& measure, MissingPolicy policy);

inline constexpr int kFoldCount = 9;

/// Fold roles for one cross-validation rotation: 4 polytomization folds,
/// 4 IRT-training folds, 1 test fold.
struct DatasetSplit {
    std::array<int, 4> poly_folds{};
    std::array<int, 4> train_folds{};
    int test_fold = 0;

    bool is_poly(int fold) const;
    bool is_train(int fold) const;
};

struct FoldPlan {
    std::unordered_map<std::string, int> fold_of;
    std::array<std::size_t, kFoldCount> fold_sizes{};
    std::array<DatasetSplit, kFoldCount> rotations{};
    std::uint64_t seed = 0;

    int fold(const std::string& respondent_id) const;
};

/// Stable 64-bit hash of (respondent_id, seed).
std::uint64_t fold_hash(std::string_view respondent_id, std::uint64_t seed);

/// Respondents are ordered by fold_hash (ties by id) and dealt round-robin
/// into 9 folds, so sizes differ by at most one and the assignment does not
/// depend on row order.
FoldPlan make_splits(std::span<const std::string> respondent_ids, std::uint64_t seed);
FoldPlan make_splits(std::span<const RespondentRecord> records, std::uint64_t seed);

} // namespace alba
