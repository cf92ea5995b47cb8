#pragma once

#include <stdexcept>
#include <string>

namespace msct {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input file.
class LoadError : public Error {
public:
    using Error::Error;
};

/// Missing or malformed configuration value; the message names the key.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Argument or state outside an operation's domain (bad index, off-grid energy, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Non-finite iterate or other numerical breakdown during reconstruction.
class DivergenceError : public Error {
public:
    using Error::Error;
};

} // namespace msct
