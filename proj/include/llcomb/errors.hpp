#pragma once

#include <stdexcept>
#include <string>

namespace llcomb {

/// Argument outside the domain of a closed-form map (e.g. |t| >= 1).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative solver gave up. The message carries the iteration report.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, int iterations, double residual)
        : std::runtime_error(what), iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// Newton matrix is numerically rank deficient (expected at bifurcation points).
class SingularJacobianError : public std::runtime_error {
public:
    SingularJacobianError(const std::string& what, double rcond)
        : std::runtime_error(what), rcond_(rcond) {}

    double rcond() const noexcept { return rcond_; }

private:
    double rcond_;
};

/// A computed nonconstant solution left the region where nonconstant solutions can exist.
/// This can only be caused by a defect in the solver, never by user input.
class TheoryViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace llcomb
