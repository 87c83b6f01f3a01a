#pragma once

#include <stdexcept>
#include <string>

namespace tarpbench {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV/JSON syntax).
class ParseError : public Error {
  public:
    using Error::Error;
};

/// Well-formed input whose content violates a schema contract
/// (wrong label cardinality, missing keys, bad column).
class SchemaError : public Error {
  public:
    using Error::Error;
};

/// A value outside its documented domain (non-finite feature, empty counts).
class ValueError : public Error {
  public:
    using Error::Error;
};

/// Mismatched vector/matrix dimensions.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A split that leaves some class absent from some subset.
class PartitionError : public Error {
  public:
    using Error::Error;
};

/// A 1D Gaussian fit that cannot be formed (class missing at a node).
class FitError : public Error {
  public:
    using Error::Error;
};

/// Out-of-range estimator parameters (k < 1, n < 1, runs < 1).
class ParameterError : public Error {
  public:
    using Error::Error;
};

/// Dataset-level precondition failures (empty training set, single class).
class DataError : public Error {
  public:
    using Error::Error;
};

/// Numeric breakdown (singular covariance, failed factorization).
class NumericError : public Error {
  public:
    using Error::Error;
};

/// Filesystem failures.
class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace tarpbench
