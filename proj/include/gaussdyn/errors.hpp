#pragma once

#include <stdexcept>
#include <string>

namespace gaussdyn {

// Caller violated a documented precondition (bad parameters, malformed input).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Base for every failure that originates in the numerics rather than the input.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonPhysicalState : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class CriticalPoint : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class StepFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class QuadratureNoConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SupercriticalExcursion : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoThreshold : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// The top-hat profile has no derivative at its edges.
class DerivativeUndefined : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

}  // namespace gaussdyn
