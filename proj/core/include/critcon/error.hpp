#pragma once

#include <stdexcept>
#include <string>

namespace critcon {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied parameter is outside its documented range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// The hypothesis an evaluation relies on does not hold at the requested
/// point (shadowed pixel, misaligned ridge, mismatched grids, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The surface Hessian is too close to singular for H^-1 terms.
class ConditioningError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Malformed file or configuration input.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace critcon
