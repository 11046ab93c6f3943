#pragma once

#include <stdexcept>
#include <string>

namespace hmarl {

// Every failure raised by the library derives from Error. The CLI maps the
// category onto its exit-code contract (see tools/hmarl_cli.cpp).
enum class ErrorKind {
    InvalidInput,
    DegenerateGeometry,
    InvalidConfig,
    InvalidAction,
    InvalidQuery,
    InvalidState,
    InvalidCommand,
    Shape,
    InvalidMask,
    Checkpoint,
    Divergence,
    InvalidSetup,
    MissingArtifact,
    Aggregation,
    LogIntegrity,
    InsufficientData,
    InvalidComponent,
    InternalConsistency,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidInput:        return "invalid input";
        case ErrorKind::DegenerateGeometry:  return "degenerate geometry";
        case ErrorKind::InvalidConfig:       return "invalid config";
        case ErrorKind::InvalidAction:       return "invalid action";
        case ErrorKind::InvalidQuery:        return "invalid query";
        case ErrorKind::InvalidState:        return "invalid state";
        case ErrorKind::InvalidCommand:      return "invalid command";
        case ErrorKind::Shape:               return "shape error";
        case ErrorKind::InvalidMask:         return "invalid mask";
        case ErrorKind::Checkpoint:          return "checkpoint error";
        case ErrorKind::Divergence:          return "divergence";
        case ErrorKind::InvalidSetup:        return "invalid setup";
        case ErrorKind::MissingArtifact:     return "missing artifact";
        case ErrorKind::Aggregation:         return "aggregation error";
        case ErrorKind::LogIntegrity:        return "log integrity error";
        case ErrorKind::InsufficientData:    return "insufficient data";
        case ErrorKind::InvalidComponent:    return "invalid component";
        case ErrorKind::InternalConsistency: return "internal consistency error";
    }
    return "error";
}

}  // namespace hmarl
