#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chexlab {

enum class ErrorKind {
    EmptyReport,
    InsufficientCorpus,
    SchemeMismatch,
    LexiconParse,
    DuplicatePattern,
    MalformedResponse,
    UnknownCategory,
    MissingText,
    ModelFormat,
    StudyMismatch,
    MissingCategory,
    Http,
    Io,
    Config,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
          kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace chexlab
