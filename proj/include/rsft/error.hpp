#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rsft {

/// Root of every error thrown by the library. `kind()` is a stable token
/// used in the CLI's machine-readable error line.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "error"; }
};

class UsageError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "usage"; }
};

class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "domain"; }
};

class NotAvailable : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "not_available"; }
};

class EstimatorError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "estimator"; }
};

class EmptySpaceError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "empty_space"; }
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, std::string key, const std::string& message)
        : Error(line == 0 ? message
                          : "line " + std::to_string(line) + " (" + key + "): " + message),
          line_(line), key_(std::move(key)) {}

    const char* kind() const noexcept override { return "parse"; }
    std::size_t line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    std::size_t line_;
    std::string key_;
};

class LoadError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "load"; }
};

class IoError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "io"; }
};

} // namespace rsft
