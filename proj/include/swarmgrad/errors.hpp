#pragma once

#include <stdexcept>
#include <string>

namespace swarmgrad {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid hyperparameters, bounds, or shapes supplied by the caller.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Experiment specification rejected before any work started.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Numerical failure during a run (non-finite fitness, divergence).
class RunError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a function (e.g. BCE at 0).
class DomainError : public Error {
public:
    using Error::Error;
};

} // namespace swarmgrad
