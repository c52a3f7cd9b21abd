#pragma once

#include <stdexcept>
#include <string>

namespace audit {

// Base of every error the toolkit throws. The subclasses map one-to-one onto
// the CLI exit-code classes (see cli.hpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad command-line usage or an invalid configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Unsupported or corrupt file contents.
class FormatError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Shape or size mismatch between operands.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Empty inputs, incompatible fingerprints, and similar data-level problems.
class DataError : public Error {
public:
    using Error::Error;
};

// Numerically undefined results: zero normalizer, single-class AUC,
// collapsed geometry, out-of-range schedule step.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace audit
