#include "chexlab/error.hpp"

namespace chexlab {

std::string_view error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::EmptyReport: return "EmptyReport";
        case ErrorKind::InsufficientCorpus: return "InsufficientCorpus";
        case ErrorKind::SchemeMismatch: return "SchemeMismatch";
        case ErrorKind::LexiconParse: return "LexiconParseError";
        case ErrorKind::DuplicatePattern: return "DuplicatePattern";
        case ErrorKind::MalformedResponse: return "MalformedResponse";
        case ErrorKind::UnknownCategory: return "UnknownCategory";
        case ErrorKind::MissingText: return "MissingText";
        case ErrorKind::ModelFormat: return "ModelFormatError";
        case ErrorKind::StudyMismatch: return "StudyMismatch";
        case ErrorKind::MissingCategory: return "MissingCategory";
        case ErrorKind::Http: return "HttpError";
        case ErrorKind::Io: return "IoError";
        case ErrorKind::Config: return "ConfigError";
    }
    return "Error";
}

}  // namespace chexlab
