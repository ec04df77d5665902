#include "kap/error.hpp"

namespace kap {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroInverse: return "ZeroInverse";
        case ErrorCode::InvalidN: return "InvalidN";
        case ErrorCode::UnknownOwf: return "UnknownOwf";
        case ErrorCode::OutOfOrder: return "OutOfOrder";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::NoMatch: return "NoMatch";
        case ErrorCode::RangeError: return "RangeError";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::InvalidGuess: return "InvalidGuess";
        case ErrorCode::NoCandidate: return "NoCandidate";
        case ErrorCode::ZeroW: return "ZeroW";
        case ErrorCode::NotCanonical: return "NotCanonical";
        case ErrorCode::BadLength: return "BadLength";
        case ErrorCode::BadType: return "BadType";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::OrderError: return "OrderError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Error";
}

} // namespace kap
