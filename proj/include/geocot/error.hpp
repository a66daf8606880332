#pragma once

#include <stdexcept>
#include <string>

namespace geocot {

enum class Errc {
    MissingTag,
    DuplicateTag,
    Interleaved,
    EmptySection,
    StrayContent,
    AnswerTypeMismatch,
    InvalidBox,
    ScaleAmbiguous,
    EscapeError,
    LengthMismatch,
    EmptyInput,
    EmptyReferenceSet,
    CorpusTooSmall,
    GroupTooSmall,
    TokenOutOfVocabulary,
    CoordOutOfRange,
    UnknownTask,
    MissingExemplars,
    Transport,
    MalformedResponse,
    Timeout,
    InvalidConfig,
    Schema,
    Io,
};

inline const char* errc_name(Errc c) {
    switch (c) {
    case Errc::MissingTag: return "MissingTag";
    case Errc::DuplicateTag: return "DuplicateTag";
    case Errc::Interleaved: return "Interleaved";
    case Errc::EmptySection: return "EmptySection";
    case Errc::StrayContent: return "StrayContent";
    case Errc::AnswerTypeMismatch: return "AnswerTypeMismatch";
    case Errc::InvalidBox: return "InvalidBox";
    case Errc::ScaleAmbiguous: return "ScaleAmbiguous";
    case Errc::EscapeError: return "EscapeError";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::EmptyReferenceSet: return "EmptyReferenceSet";
    case Errc::CorpusTooSmall: return "CorpusTooSmall";
    case Errc::GroupTooSmall: return "GroupTooSmall";
    case Errc::TokenOutOfVocabulary: return "TokenOutOfVocabulary";
    case Errc::CoordOutOfRange: return "CoordOutOfRange";
    case Errc::UnknownTask: return "UnknownTask";
    case Errc::MissingExemplars: return "MissingExemplars";
    case Errc::Transport: return "Transport";
    case Errc::MalformedResponse: return "MalformedResponse";
    case Errc::Timeout: return "Timeout";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Schema: return "Schema";
    case Errc::Io: return "Io";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace geocot
