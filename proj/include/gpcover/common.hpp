#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace gpcover {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two generator points coincide (within tolerance), so no bisector exists.
struct DegenerateGenerators : Error {
    using Error::Error;
};

/// A point that must lie in the domain polygon does not.
struct OutOfDomain : Error {
    using Error::Error;
};

/// A pivot in the incremental Gram factorization lost positivity.
struct NumericalBreakdown : Error {
    using Error::Error;
};

/// A region holds no positive-density grid node; its centroid is undefined.
struct ZeroMass : Error {
    using Error::Error;
};

/// No grid node of the requested pitch falls inside the domain.
struct EmptyGrid : Error {
    using Error::Error;
};

/// A configuration value violates its invariant, or an unknown key was seen.
struct ConfigError : Error {
    using Error::Error;
};

/// An iteration cap was reached before the convergence tolerance.
struct NonConvergence : Error {
    using Error::Error;
};

/// Regularization exponent outside the admissible open interval (0, 1/2).
struct InvalidAlpha : Error {
    using Error::Error;
};

namespace detail {

using WarningHook = void (*)(const std::string&);

/// Warning sink. Tests may redirect it; default writes to stderr.
inline WarningHook& warning_hook() {
    static WarningHook hook = nullptr;
    return hook;
}

inline void log_warning(const std::string& msg) {
    if (auto hook = warning_hook()) {
        hook(msg);
    } else {
        std::fputs(("warning: " + msg + "\n").c_str(), stderr);
    }
}

}  // namespace detail

}  // namespace gpcover
