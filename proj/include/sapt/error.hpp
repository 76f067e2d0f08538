#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sapt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDescriptor : public Error {
public:
    using Error::Error;
};

class EmptyArchive : public Error {
public:
    using Error::Error;
};

class CorruptRepertoire : public Error {
public:
    using Error::Error;
};

/// Malformed input file; carries the 1-based line number of the offending line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class VersionError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value. `field` names the offending key when known.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class EvolutionFailed : public Error {
public:
    using Error::Error;
};

class NoSafeCell : public Error {
public:
    using Error::Error;
};

}  // namespace sapt
