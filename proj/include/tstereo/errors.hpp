#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tstereo {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid user input (files, flags). The CLI maps these to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(std::string file, std::size_t line, const std::string& what)
        : InputError(file + ":" + std::to_string(line) + ": " + what),
          file_(std::move(file)), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

class UnknownCamera : public InputError {
public:
    explicit UnknownCamera(const std::string& name) : InputError("unknown camera '" + name + "'") {}
};

class StepOutOfRange : public InputError {
public:
    using InputError::InputError;
};

class IndexOutOfRange : public InputError {
public:
    using InputError::InputError;
};

class DimensionMismatch : public InputError {
public:
    using InputError::InputError;
};

class ShapeMismatch : public InputError {
public:
    using InputError::InputError;
};

/// The candidate point lands on the source image plane (|d_b| < 1e-9 m).
class DegenerateProjection : public Error {
public:
    using Error::Error;
};

/// Every weight reached zero before k hypotheses were selected.
class AllZeroWeights : public InputError {
public:
    using InputError::InputError;
};

}  // namespace tstereo
