#pragma once

#include <stdexcept>
#include <string>

namespace kap {

// Every failure the library can signal. Callers that need to branch on the
// failure kind switch on code(); the message carries instance detail
// (field paths, lengths, offending values).
enum class ErrorCode {
    ZeroInverse,
    InvalidN,
    UnknownOwf,
    OutOfOrder,
    LengthMismatch,
    NoMatch,
    RangeError,
    TooLarge,
    InvalidGuess,
    NoCandidate,
    ZeroW,
    NotCanonical,
    BadLength,
    BadType,
    ParseError,
    ValidationError,
    OrderError,
    IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace kap
