#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lutclock {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter outside its physical domain (negative duration, non-finite rate, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Eigendecomposition failed for a segment; carries the segment index when
/// raised from run_sequence.
class PropagationError : public Error {
public:
    PropagationError(const std::string& what, std::ptrdiff_t segment = -1)
        : Error(segment < 0 ? what : what + " (segment " + std::to_string(segment) + ")"),
          segment_(segment) {}
    std::ptrdiff_t segment() const { return segment_; }

private:
    std::ptrdiff_t segment_;
};

class ConstructionError : public Error {
public:
    using Error::Error;
};

/// The fringe maximum sits on the scan boundary.
class ScanRangeError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    enum class Kind { singular, not_converged, insufficient_data };

    FitError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& key_path, const std::string& what)
        : Error(key_path + ": " + what), key_path_(key_path) {}
    const std::string& key_path() const { return key_path_; }

private:
    std::string key_path_;
};

} // namespace lutclock
