#pragma once

#include <stdexcept>
#include <string>

namespace whatif {

/// Machine-readable error codes shared by the library, CLI and HTTP layer.
enum class ErrorCode {
    malformed_input,
    dangling_reference,
    duplicate_id,
    invalid_value,
    unresolved_reference,
    syntax_error,
    unknown_keyword,
    mismatched_universe,
    unknown_entity,
    empty_period,
    insufficient_history,
    instance_too_large,
    translation_failed,
    backend_unavailable,
    ambiguous_question,
    bank_format,
    not_found,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised while reading dataset files. Line and column are 1-based, 0 when
/// not applicable (e.g. a structural error inside a JSON document).
class DatasetError : public Error {
public:
    DatasetError(ErrorCode code, std::string file, std::size_t line, std::size_t column,
                 const std::string& message);

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::string file_;
    std::size_t line_;
    std::size_t column_;
};

}  // namespace whatif
