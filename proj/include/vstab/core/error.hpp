#pragma once

#include <stdexcept>
#include <string>

namespace vstab {

/// Base class for all recoverable toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite or out-of-contract argument values.
class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// Mismatched image/tensor dimensions between operands.
class ShapeMismatchError : public Error {
public:
    using Error::Error;
};

/// Matrix not invertible within tolerance.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// Point configuration without enough rank for a fit (e.g. collinear).
class DegenerateGeometryError : public Error {
public:
    using Error::Error;
};

/// Fewer correspondences than the estimator requires.
class InsufficientPointsError : public Error {
public:
    using Error::Error;
};

/// Robust estimation failed to reach the consensus threshold.
class NoModelError : public Error {
public:
    using Error::Error;
};

/// No pixel is valid across all frames; the crop search has no solution.
class NoValidRegionError : public Error {
public:
    using Error::Error;
};

/// Malformed or version-incompatible file contents.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure (missing file, unwritable path, ...).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace vstab
