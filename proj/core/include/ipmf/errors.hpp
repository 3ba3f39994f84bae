#pragma once

#include <stdexcept>
#include <string>

namespace ipmf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (|rho| >= 1, t not in (0,1), ...).
class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

/// Operand dimensions do not agree.
class ShapeMismatchError : public Error {
public:
    using Error::Error;
};

/// A matrix that must be inverted has min eigenvalue below the relative singularity floor.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// A matrix that must be positive semidefinite has a clearly negative eigenvalue.
class NotPositiveSemidefiniteError : public Error {
public:
    using Error::Error;
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A closed-form expression left its real domain (non-finite or out-of-range value).
class FormulaDomainError : public Error {
public:
    using Error::Error;
};

/// A process carries the wrong Markov parameterization for the requested projection.
class TagMismatchError : public Error {
public:
    using Error::Error;
};

} // namespace ipmf
