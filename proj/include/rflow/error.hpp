#pragma once

#include <stdexcept>
#include <string>

namespace rflow {

/// Base class of every error thrown by the library. The C API maps the
/// subclasses onto its status codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed input text (case or mechanism files); message carries file:line:col.
class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Binary file with wrong magic, version, checksum or layout.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Linear solver or Newton iteration failed to converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

} // namespace rflow
