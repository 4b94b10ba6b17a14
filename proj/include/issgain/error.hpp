#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace issgain {

enum class ErrorKind {
    NonPositiveCoefficient,
    DegenerateBoundary,
    GridMismatch,
    ConvergenceFailure,
    SingularBVP,
    UncertifiedHypothesis,
    InadmissibleCase,
    IncompatibleInitialCondition,
    MissingEnvelopeParameters,
    FixedPointDivergence,
    InvalidArgument,
    ConfigError,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NonPositiveCoefficient: return "NonPositiveCoefficient";
        case ErrorKind::DegenerateBoundary: return "DegenerateBoundary";
        case ErrorKind::GridMismatch: return "GridMismatch";
        case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorKind::SingularBVP: return "SingularBVP";
        case ErrorKind::UncertifiedHypothesis: return "UncertifiedHypothesis";
        case ErrorKind::InadmissibleCase: return "InadmissibleCase";
        case ErrorKind::IncompatibleInitialCondition: return "IncompatibleInitialCondition";
        case ErrorKind::MissingEnvelopeParameters: return "MissingEnvelopeParameters";
        case ErrorKind::FixedPointDivergence: return "FixedPointDivergence";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

/// Exception carrying one of the library's error kinds.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) throw Error(kind, message);
}

}  // namespace issgain
