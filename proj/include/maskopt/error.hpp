#pragma once

#include <stdexcept>
#include <string>

namespace maskopt {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto exit codes, so new error kinds should derive from one of
// the two families below rather than from Error directly.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input could not be read or parsed (exit code 2 in the CLI).
class FormatError : public Error {
public:
    using Error::Error;
};

// A request violates a shape, pattern, budget or capacity constraint
// (exit code 3 in the CLI).
class ConstraintError : public Error {
public:
    using Error::Error;
};

class ShapeError : public ConstraintError {
public:
    using ConstraintError::ConstraintError;
};

class PatternError : public ConstraintError {
public:
    using ConstraintError::ConstraintError;
};

class BudgetError : public ConstraintError {
public:
    using ConstraintError::ConstraintError;
};

class CapacityError : public ConstraintError {
public:
    using ConstraintError::ConstraintError;
};

class NumericalError : public ConstraintError {
public:
    using ConstraintError::ConstraintError;
};

} // namespace maskopt
