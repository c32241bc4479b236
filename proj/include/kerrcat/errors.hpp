#pragma once

#include <stdexcept>
#include <string>

namespace kerrcat {

// Failure categories surfaced through the C API as numeric codes and through
// the C++ layer as typed exceptions.  Config parsing problems map to process
// exit code 2, everything else here to exit code 3.
enum class ErrorKind {
    ConfigError,
    TruncationTooSmall,
    LayoutMismatch,
    NonFinite,
    NonHermitian,
    MinimizationFailed,
    DerivativeUnstable,
    NoSignChange,
    FitDiverged,
    StepTooLarge,
    OutOfWindow,
    ShiftExceedsLinewidth,
    PeaksUnresolved,
    PoissonFitPoor,
    ConditionWindowTooWide,
    GridMismatch,
};

const char* error_kind_name(ErrorKind kind);

class SimError : public std::runtime_error {
public:
    SimError(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
          kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace kerrcat
