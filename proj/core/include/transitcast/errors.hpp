#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace transitcast {

// Root of every error raised by the library. The CLI maps the subclasses
// below onto exit codes: input problems -> 2, numerical failures -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or missing user input (files, columns, cells).
class InputError : public Error {
public:
    using Error::Error;
};

class SchemaError : public InputError {
public:
    SchemaError(std::string column, const std::string& what)
        : InputError(what), column_(std::move(column)) {}
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

class ParseError : public InputError {
public:
    ParseError(std::size_t line, const std::string& what)
        : InputError(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateDateError : public InputError {
public:
    using InputError::InputError;
};

class EmptySeriesError : public InputError {
public:
    using InputError::InputError;
};

class InsufficientDataError : public InputError {
public:
    using InputError::InputError;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class InvariantError : public Error {
public:
    using Error::Error;
};

class StateError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// Numerical failures: NaN/overflow, optimizer or IRLS non-convergence.
class NumericError : public Error {
public:
    using Error::Error;
};

class NonConvergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

class SimulationOverflowError : public NumericError {
public:
    using NumericError::NumericError;
};

class FitError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace transitcast
