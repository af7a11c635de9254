#pragma once

#include <stdexcept>
#include <string>

namespace riskpipe {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Incompatible matrix/vector dimensions.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Invalid argument value (bad fraction, k out of range, non-finite input, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// CSV header does not match the expected schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Malformed CSV content; message carries 1-based row/column.
class ParseError : public Error {
public:
    using Error::Error;
};

/// File contains no data at all.
class EmptyInputError : public ParseError {
public:
    using ParseError::ParseError;
};

/// Too few samples for the requested operation.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Matrix is singular / not positive definite.
class SingularError : public Error {
public:
    using Error::Error;
};

/// Iterative method hit its cap without converging.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Model kind does not support the requested operation.
class UnsupportedModelError : public Error {
public:
    using Error::Error;
};

/// Metric undefined for this input (constant truth, single cluster).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// Perplexity calibration could not bracket the target entropy.
class CalibrationError : public Error {
public:
    using Error::Error;
};

/// Embedding optimization produced non-finite state.
class EmbeddingError : public Error {
public:
    using Error::Error;
};

/// Filesystem write/read failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// Pipeline stage failure; message is tagged with the stage name.
class PipelineError : public Error {
public:
    using Error::Error;
};

}  // namespace riskpipe
