#pragma once

#include <stdexcept>
#include <string>

namespace wtm {

// Two families: bad input or model data (CLI exit 2) and numerical trouble (exit 3).
enum class ErrorFamily { Model, Numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorFamily family, const std::string& what)
        : std::runtime_error(what), family_(family) {}
    ErrorFamily family() const noexcept { return family_; }

private:
    ErrorFamily family_;
};

class ModelError : public Error {
public:
    explicit ModelError(const std::string& what) : Error(ErrorFamily::Model, what) {}
};

// Argument on a pole, branch cut or logarithmic singularity.
class DomainError : public ModelError {
public:
    using ModelError::ModelError;
};

class SingularEndpointError : public ModelError {
public:
    using ModelError::ModelError;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double achieved = 0.0)
        : Error(ErrorFamily::Numerical, what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

class PrecisionLoss : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

class DegeneracyError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

class InconsistencyError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

class ParsevalViolation : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

// Not a failure: the rotated m really has a pole here (an eigenvalue).
class PoleSignal : public Error {
public:
    PoleSignal(const std::string& what, double where)
        : Error(ErrorFamily::Numerical, what), where_(where) {}
    double where() const noexcept { return where_; }

private:
    double where_;
};

}  // namespace wtm
