#pragma once

#include <stdexcept>
#include <string>

namespace finepose {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameterError : public Error {
public:
    using Error::Error;
};

/// A projected point lies at or behind the camera plane.
class BehindCameraError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_ = 0;
};

class EmptyMeshError : public Error {
public:
    using Error::Error;
};

class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

/// No usable (nonempty) segmentation reference was supplied.
class NoReferenceError : public Error {
public:
    using Error::Error;
};

/// The mesh is invisible at the initial pose and at every first-sweep candidate.
class DegenerateInitializationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace finepose
