#pragma once

#include <stdexcept>
#include <string>

namespace icsel {

// Base for every error the library raises on purpose. The CLI maps
// DataError to exit code 2 and NumericalError to exit code 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// Q(L) - Q(R) fell below the log-space underflow floor for some subject.
class DegenerateLikelihood : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Every observation is right-censored, so no maximal intersection exists.
class NoFiniteIntervals : public DataError {
public:
    using DataError::DataError;
};

class NonConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class KktViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularGram : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NotPositiveDefinite : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class EmptyTruncation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BracketFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class RejectionExhausted : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace icsel
