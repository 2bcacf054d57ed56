#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fiberdyn {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (bad parameters, wrong regime, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::string message, std::size_t offset, std::vector<std::string> expected)
        : Error(std::move(message)), offset_(offset), expected_(std::move(expected)) {}

    /// Byte offset into the source text where parsing failed.
    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class UnknownIdentifierError : public ParseError {
public:
    UnknownIdentifierError(std::string name, std::size_t offset)
        : ParseError("unknown identifier '" + name + "'", offset, {}), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Evaluation left the natural domain of a sub-expression (ln of a non-positive
/// number, division by zero, ...). Carried as a value, not thrown, on hot paths.
struct DomainError {
    std::string subexpression;
    std::string reason;
};

class DomainErrorException : public Error {
public:
    explicit DomainErrorException(DomainError e)
        : Error("domain error in '" + e.subexpression + "': " + e.reason), error_(std::move(e)) {}

    const DomainError& error() const noexcept { return error_; }

private:
    DomainError error_;
};

}  // namespace fiberdyn
