#pragma once

#include <stdexcept>
#include <string>

namespace greina {

// Error categories double as CLI exit codes (stable scripting contract).
enum class ErrorCategory : int {
    usage = 2,
    data = 3,
    insufficient_data = 4,
    state = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& message) : Error(ErrorCategory::usage, message) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& message) : Error(ErrorCategory::data, message) {}
};

// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& message, long line)
        : Error(ErrorCategory::data, message + " (line " + std::to_string(line) + ")"),
          line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& message)
        : Error(ErrorCategory::insufficient_data, message) {}
};

class StateError : public Error {
public:
    explicit StateError(const std::string& message) : Error(ErrorCategory::state, message) {}
};

}  // namespace greina
