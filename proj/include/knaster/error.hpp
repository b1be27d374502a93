#ifndef KNASTER_ERROR_HPP
#define KNASTER_ERROR_HPP

#include <stdexcept>
#include <string>

namespace knaster {

enum class ErrorKind {
    OutOfDomain,
    InvalidMap,
    InvalidLoop,
    OrderHypothesisViolated,
    NotAVisor,
    NotRemovable,
    NonRemovableVisor,
    TargetSelectionFailed,
    InfeasiblePerturbation,
    InsufficientTeeth,
    NoFixedPointOnBranch,
    HypothesisViolated,
    DepthUnavailable,
    InconsistentThread,
    NotFoundWithinHorizon,
    PreconditionViolated,
    TubeTooNarrow,
    Format,
    IO,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::OutOfDomain: return "OutOfDomain";
        case ErrorKind::InvalidMap: return "InvalidMap";
        case ErrorKind::InvalidLoop: return "InvalidLoop";
        case ErrorKind::OrderHypothesisViolated: return "OrderHypothesisViolated";
        case ErrorKind::NotAVisor: return "NotAVisor";
        case ErrorKind::NotRemovable: return "NotRemovable";
        case ErrorKind::NonRemovableVisor: return "NonRemovableVisor";
        case ErrorKind::TargetSelectionFailed: return "TargetSelectionFailed";
        case ErrorKind::InfeasiblePerturbation: return "InfeasiblePerturbation";
        case ErrorKind::InsufficientTeeth: return "InsufficientTeeth";
        case ErrorKind::NoFixedPointOnBranch: return "NoFixedPointOnBranch";
        case ErrorKind::HypothesisViolated: return "HypothesisViolated";
        case ErrorKind::DepthUnavailable: return "DepthUnavailable";
        case ErrorKind::InconsistentThread: return "InconsistentThread";
        case ErrorKind::NotFoundWithinHorizon: return "NotFoundWithinHorizon";
        case ErrorKind::PreconditionViolated: return "PreconditionViolated";
        case ErrorKind::TubeTooNarrow: return "TubeTooNarrow";
        case ErrorKind::Format: return "Format";
        case ErrorKind::IO: return "IO";
    }
    return "Unknown";
}

/// All library failures are reported with this type; `kind()` carries the
/// machine-readable category and `what()` the detail.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace knaster

#endif  // KNASTER_ERROR_HPP
