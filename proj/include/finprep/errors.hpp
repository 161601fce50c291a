#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace finprep {

// Base class for all failures raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Failure tied to a specific line of an input file or stream.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Invalid configuration value or missing input path.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace finprep
