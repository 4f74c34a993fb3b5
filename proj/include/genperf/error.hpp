#pragma once

#include <stdexcept>
#include <string>

namespace genperf {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document (spec file, hardware file, trace, rules).
class ParseError : public Error {
public:
    using Error::Error;
};

/// A well-formed document whose contents violate a documented invariant.
/// The message names the invariant, e.g. "downsample_factor >= 1".
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An integer cost quantity exceeded the 64-bit unsigned range.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace genperf
