#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace themeflow {

/// Base for every error caused by invalid input or a violated model domain.
/// The CLI maps these to exit code 2.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParams : public DomainError {
public:
    using DomainError::DomainError;
};

/// Time argument outside the branch the operation is defined on.
class OutOfWindow : public DomainError {
public:
    using DomainError::DomainError;
};

/// Rise curve starts at or above saturation, so there is no inflection.
class NoInflection : public DomainError {
public:
    using DomainError::DomainError;
};

/// Fixed-step integrator produced a negative or non-finite value.
class StepTooLarge : public DomainError {
public:
    using DomainError::DomainError;
};

class TooFewSamples : public DomainError {
public:
    using DomainError::DomainError;
};

class NotConverged : public DomainError {
public:
    using DomainError::DomainError;
};

class ParseError : public DomainError {
public:
    ParseError(std::size_t row, std::size_t column, const std::string& what)
        : DomainError("line " + std::to_string(row) + ", column " + std::to_string(column) +
                      ": " + what),
          row_(row),
          column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class NonMonotoneTime : public DomainError {
public:
    explicit NonMonotoneTime(std::size_t row)
        : DomainError("line " + std::to_string(row) + ": time decreases"), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// File-system failure. The CLI maps these to exit code 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace themeflow
