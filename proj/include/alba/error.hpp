#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace alba {

enum class Errc {
    MalformedRow,
    UnknownItemId,
    DuplicateRespondent,
    IncompleteRecord,
    TooFewRespondents,
    EmptyCorpus,
    RankTooLarge,
    DegenerateInput,
    AllWordsOutOfVocabulary,
    SingularSystem,
    InsufficientData,
    SetMismatch,
    KTooLargeForData,
    UnobservedCategory,
    NonConvergence,
    NoItemsRemaining,
    ItemAlreadyAdministered,
    EmptySession,
    PowersetTooLarge,
    DegenerateTree,
    ZeroVariance,
    SingularCorrelation,
    UnknownStrategy,
    UnknownScoring,
    BundleNotLoaded,
    SessionNotFound,
    SessionDone,
    WrongItem,
    InvalidArgument,
    Io,
};

/// Stable snake_case identifier, used in service payloads and CLI messages.
std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace alba
