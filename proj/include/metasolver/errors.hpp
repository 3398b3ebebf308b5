#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace metasolver {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

/// QUBO coefficient given below the diagonal (j < i).
class LowerTriangleEntry : public ParseError {
public:
    using ParseError::ParseError;
};

class UnknownNode : public Error {
public:
    using Error::Error;
};

class TooLarge : public Error {
public:
    using Error::Error;
};

class Infeasible : public Error {
public:
    using Error::Error;
};

class CompositionError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// quantum backends
class NoCompatibleBackend : public Error {
public:
    using Error::Error;
};

class AuthenticationRequired : public Error {
public:
    using Error::Error;
};

class BackendMismatch : public Error {
public:
    using Error::Error;
};

class RemoteUnavailable : public Error {
public:
    using Error::Error;
};

// problem lifecycle
class UnknownProblemType : public Error {
public:
    using Error::Error;
};

class UnknownSolver : public Error {
public:
    using Error::Error;
};

class UnknownProblem : public Error {
public:
    using Error::Error;
};

class SolverTypeMismatch : public Error {
public:
    using Error::Error;
};

class InvalidSetting : public Error {
public:
    InvalidSetting(const std::string& name, const std::string& reason)
        : Error("setting '" + name + "': " + reason), name_(name) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// The problem's lifecycle state forbids the operation.
class IllegalState : public Error {
public:
    using Error::Error;
};

/// A request that is malformed independent of lifecycle state.
class BadRequest : public Error {
public:
    using Error::Error;
};

}  // namespace metasolver
