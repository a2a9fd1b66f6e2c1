#pragma once

#include <stdexcept>
#include <string>

namespace nidsrobust {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed inputs: schema/header mismatches, bad configuration values,
/// violated preconditions. The CLI maps these to exit code 2.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Unreadable or unwritable files. The CLI maps these to exit code 1.
class IoError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace nidsrobust
