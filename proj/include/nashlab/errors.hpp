#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nashlab {

/// Base class for all failures raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument / configuration (grid shape, parameter ranges, mode mismatches).
struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

/// Per-step fixed-point iteration failed to reach tolerance.
struct PicardError : Error {
    PicardError(const std::string& msg, int step_index_, double last_residual_)
        : Error(msg), step_index(step_index_), last_residual(last_residual_) {}
    int step_index;
    double last_residual;
};

/// Non-finite value detected in a solver state.
struct NonFiniteError : Error {
    NonFiniteError(const std::string& msg, int step_index_) : Error(msg), step_index(step_index_) {}
    int step_index;
};

/// Backward coefficient ODE left the trust region.
struct BlowUpError : Error {
    BlowUpError(const std::string& msg, double time_) : Error(msg), time(time_) {}
    double time;
};

/// Mass conservation broke in a density evolution step.
struct MassError : Error {
    MassError(const std::string& msg, int step_index_, double drift_) : Error(msg), step_index(step_index_), drift(drift_) {}
    int step_index;
    double drift;
};

/// File format / serialization problems.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace nashlab
