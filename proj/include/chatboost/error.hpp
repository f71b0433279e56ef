#pragma once

#include <stdexcept>

namespace chatboost {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input data (bad token, bad row, bad JSON line).
struct ParseError : Error { using Error::Error; };

/// Input does not match the declared schema.
struct SchemaError : Error { using Error::Error; };

/// A column reference is unknown or of the wrong kind.
struct ColumnError : Error { using Error::Error; };

/// A parameter is outside its documented bounds.
struct ParamError : Error { using Error::Error; };

/// Containers that must agree in length or layout do not.
struct ShapeError : Error { using Error::Error; };

/// An operation that needs at least one row got none.
struct EmptyDataError : Error { using Error::Error; };

/// A categorical is too wide for the requested encoding.
struct CardinalityError : Error { using Error::Error; };

/// A stratified sampler could not fill its quota.
struct SamplingError : Error { using Error::Error; };

/// The synthetic generator was asked for an unrealizable configuration.
struct GenerationError : Error { using Error::Error; };

/// A labelled operation is missing a label it needs.
struct LabelError : Error { using Error::Error; };

/// Filesystem failure (open, write, rename).
struct IoError : Error { using Error::Error; };

}  // namespace chatboost
