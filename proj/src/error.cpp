#include "whatif/error.hpp"

namespace whatif {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::malformed_input: return "malformed_input";
        case ErrorCode::dangling_reference: return "dangling_reference";
        case ErrorCode::duplicate_id: return "duplicate_id";
        case ErrorCode::invalid_value: return "invalid_value";
        case ErrorCode::unresolved_reference: return "unresolved_reference";
        case ErrorCode::syntax_error: return "syntax_error";
        case ErrorCode::unknown_keyword: return "unknown_keyword";
        case ErrorCode::mismatched_universe: return "mismatched_universe";
        case ErrorCode::unknown_entity: return "unknown_entity";
        case ErrorCode::empty_period: return "empty_period";
        case ErrorCode::insufficient_history: return "insufficient_history";
        case ErrorCode::instance_too_large: return "instance_too_large";
        case ErrorCode::translation_failed: return "translation_failed";
        case ErrorCode::backend_unavailable: return "backend_unavailable";
        case ErrorCode::ambiguous_question: return "ambiguous_question";
        case ErrorCode::bank_format: return "bank_format";
        case ErrorCode::not_found: return "not_found";
    }
    return "unknown";
}

namespace {

std::string located(const std::string& file, std::size_t line, std::size_t column,
                    const std::string& message) {
    std::string out = file;
    if (line > 0) {
        out += ":" + std::to_string(line);
        if (column > 0) out += ":" + std::to_string(column);
    }
    return out + ": " + message;
}

}  // namespace

DatasetError::DatasetError(ErrorCode code, std::string file, std::size_t line, std::size_t column,
                           const std::string& message)
    : Error(code, located(file, line, column, message)),
      file_(std::move(file)),
      line_(line),
      column_(column) {}

}  // namespace whatif
