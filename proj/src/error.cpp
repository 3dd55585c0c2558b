#include "alba/error.hpp"

namespace alba {

std::string_view errc_name(Errc code)
{
    switch (code) {
    case Errc::MalformedRow: return "malformed_row";
    case Errc::UnknownItemId: return "unknown_item_id";
    case Errc::DuplicateRespondent: return "duplicate_respondent";
    case Errc::IncompleteRecord: return "incomplete_record";
    case Errc::TooFewRespondents: return "too_few_respondents";
    case Errc::EmptyCorpus: return "empty_corpus";
    case Errc::RankTooLarge: return "rank_too_large";
    case Errc::DegenerateInput: return "degenerate_input";
    case Errc::AllWordsOutOfVocabulary: return "all_words_out_of_vocabulary";
    case Errc::SingularSystem: return "singular_system";
    case Errc::InsufficientData: return "insufficient_data";
    case Errc::SetMismatch: return "set_mismatch";
    case Errc::KTooLargeForData: return "k_too_large_for_data";
    case Errc::UnobservedCategory: return "unobserved_category";
    case Errc::NonConvergence: return "non_convergence";
    case Errc::NoItemsRemaining: return "no_items_remaining";
    case Errc::ItemAlreadyAdministered: return "item_already_administered";
    case Errc::EmptySession: return "empty_session";
    case Errc::PowersetTooLarge: return "powerset_too_large";
    case Errc::DegenerateTree: return "degenerate_tree";
    case Errc::ZeroVariance: return "zero_variance";
    case Errc::SingularCorrelation: return "singular_correlation";
    case Errc::UnknownStrategy: return "unknown_strategy";
    case Errc::UnknownScoring: return "unknown_scoring";
    case Errc::BundleNotLoaded: return "bundle_not_loaded";
    case Errc::SessionNotFound: return "session_not_found";
    case Errc::SessionDone: return "session_done";
    case Errc::WrongItem: return "wrong_item";
    case Errc::InvalidArgument: return "invalid_argument";
    case Errc::Io: return "io_error";
    }
    return "unknown";
}

} // namespace alba
