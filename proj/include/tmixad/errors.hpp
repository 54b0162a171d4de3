#pragma once

#include <stdexcept>
#include <string>

namespace tmixad {

// Bad user-supplied input: unreadable files, malformed CSV cells, mismatched
// dimensions, invalid label values. CLI exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure the library cannot recover from. CLI exit code 4.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad command line or config file usage. CLI exit code 2.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tmixad
