#pragma once

#include <stdexcept>
#include <string>

namespace hinmine {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument or violated precondition (caller bug / usage error).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Malformed input data; message carries file and line context where known.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Structurally valid input that violates the data model (kind mismatch,
/// self-follow, bad weight).
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Duplicate identity on ingestion.
class ConflictError : public Error {
public:
    using Error::Error;
};

/// Reference to an entity that does not exist.
class ReferenceError : public Error {
public:
    using Error::Error;
};

/// Lookup of an unknown node or column.
class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Metric undefined for the given input (single-class labels, zero variance).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// Pipeline-level failure (degenerate labels, empty window).
class TaskError : public Error {
public:
    using Error::Error;
};

} // namespace hinmine
