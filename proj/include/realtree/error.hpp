#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace realtree {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input. `position` is a byte offset into the parsed text.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at offset " + std::to_string(position)), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Input outside an operation's domain (empty tree where a node is required, bad options).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Well-formed text whose content violates a document schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// NaN or infinity in an input or produced during propagation.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

}  // namespace realtree
