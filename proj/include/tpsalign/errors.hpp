#pragma once

#include <stdexcept>
#include <string>

namespace tpsalign {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: unreadable file, bad JSON, bad binary header.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input parsed but violates a data invariant (group size, bounds, names).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Degenerate geometry: duplicate or collinear constraints, singular solve.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Mismatched tensor or field dimensions.
class ShapeError : public Error {
public:
    using Error::Error;
};

} // namespace tpsalign
