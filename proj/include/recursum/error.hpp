#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace recursum {

enum class ErrorCode {
    SyntaxError,
    ParseError,
    UndeclaredSymbol,
    MalformedShift,
    ValidationError,
    NoApplicableRule,
    DivisionByZero,
    SequenceOutOfRange,
    CycleDetected,
    MissingBinding,
    NotLayerDescent,
    BoundsTooLarge,
    TableBoundExceeded,
    UnsupportedConstruct,
    UnknownBuiltin,
    NoOracle,
    DomainError,
    NegativeUnderRoot,
    NoConvergence,
    DimensionMismatch,
    IoError,
};

/// Stable upper-snake name, used for `ERR:<CODE>` lines on the CLI.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Parse failure tied to a line of a spec file (1-based).
class ParseError : public Error {
public:
    ParseError(int line, const std::string& message)
        : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace recursum
