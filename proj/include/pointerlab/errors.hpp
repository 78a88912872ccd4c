#pragma once

#include <stdexcept>
#include <string>

namespace pointerlab {

// Retained Hilbert space too small for the requested object or evolution.
struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical guarantee was violated (negative probabilities, lost norm, ...).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The branch vectors stopped being parallel at some grid time.
struct PointerBrokenError : std::runtime_error {
    PointerBrokenError(const std::string& what, double time)
        : std::runtime_error(what), t(time) {}
    double t;
};

// Scenario configuration is malformed or inconsistent.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pointerlab
