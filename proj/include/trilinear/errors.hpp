// errors.hpp — exception types raised by the simulator
#pragma once

#include <stdexcept>
#include <string>

namespace trilinear {

// Base for every error the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid argument or configuration (maps to CLI exit code 2).
class ValidationError : public Error {
public:
    using Error::Error;
};

class TruncationTooTight : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class BasisOverflow : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class EmptyKeepSet : public ValidationError {
public:
    EmptyKeepSet() : ValidationError("partial_trace: keep set is empty") {}
};

class UnknownMode : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InvalidSubsystem : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class OrderCeiling : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NonPositiveParameter : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UndefinedForVacuum : public ValidationError {
public:
    UndefinedForVacuum() : ValidationError("mandel_q: undefined for a distribution with zero mean") {}
};

// Numerical failures.
class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

class ZeroProbability : public Error {
public:
    using Error::Error;
};

}  // namespace trilinear
