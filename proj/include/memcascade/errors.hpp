#pragma once

#include <stdexcept>
#include <string>

namespace memcascade {

// Base for every numerical failure raised by the library. The CLI maps this
// family to a single exit code; input validation uses std::invalid_argument.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Selectivity too low for the pressure range: the flux relation would show
// negative rejection or a permeate composition that falls with pressure.
class AdmissibilityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoRootError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class RecycleDivergence : public NumericalError {
public:
    RecycleDivergence(const std::string& what, std::string arc)
        : NumericalError(what), arc_(std::move(arc)) {}

    // Recycle arc (or "flows") that failed to settle.
    const std::string& arc() const noexcept { return arc_; }

private:
    std::string arc_;
};

class Infeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AllInfeasible : public Infeasible {
public:
    using Infeasible::Infeasible;
};

}  // namespace memcascade
