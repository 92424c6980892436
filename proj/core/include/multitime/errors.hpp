#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace multitime {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression source. `column()` is 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t column)
        : Error("syntax error at column " + std::to_string(column) + ": " + message),
          column_(column) {}

    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

class UnknownFunctionError : public ParseError {
public:
    UnknownFunctionError(const std::string& name, std::size_t column)
        : ParseError("unknown function '" + name + "'", column), name_(name) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// A free variable was not bound at evaluation or compile time.
class UnboundVariableError : public Error {
public:
    explicit UnboundVariableError(const std::string& name)
        : Error("unbound variable '" + name + "'"), name_(name) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Shape or argument mismatch between operands.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Query outside the domain a sampled object covers (e.g. a time outside a world line).
class OutOfRangeError : public Error {
public:
    using Error::Error;
};

/// Any failure of a numerical procedure: non-finite values, overflow,
/// degenerate steps. The CLI maps these to exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// log of a non-positive number, sqrt of a negative number, division by zero.
class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace multitime
