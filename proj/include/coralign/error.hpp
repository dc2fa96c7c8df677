#pragma once

#include <stdexcept>
#include <string>

namespace coralign {

// Error categories map onto the CLI exit-code scheme:
// ValidationError -> 2, IoError -> 1, NumericalError -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// Thrown by cholesky() on a non-positive pivot; CORAL catches it to
// switch to the eigendecomposition fallback.
class NotPositiveDefiniteError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateVarianceError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

}  // namespace coralign
