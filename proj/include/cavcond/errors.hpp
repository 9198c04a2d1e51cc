#pragma once

#include <stdexcept>
#include <string>

namespace cavcond {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: malformed structure, occupancy or run configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
    ConfigError(const std::string& field, const std::string& what)
        : Error(field + ": " + what), field_(field) {}

    /// JSON-pointer style path of the offending field, empty when not applicable.
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A numerical routine failed to produce a trustworthy answer.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Polariton spectrum with complex frequencies (over-critical coupling).
class UnstableSpectrumError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace cavcond
