#pragma once

#include <stdexcept>
#include <string>

namespace flexmatch {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied parameters outside an operation's contract (CLI exit 2).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A numeric procedure could not produce a trustworthy answer (CLI exit 3).
class NumericError : public Error {
public:
    using Error::Error;
};

class InvalidParams : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class DomainError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class HypothesisViolated : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class InvalidLaw : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class UnimodularityViolation : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class DenseRegime : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class TooLarge : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class NoConvergence : public NumericError {
public:
    using NumericError::NumericError;
};

class DegenerateRatio : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace flexmatch
