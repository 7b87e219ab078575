#pragma once

#include <stdexcept>
#include <string>

namespace shortpkt {

// Base type for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument values (ranges, units, regime mismatches).
class ParameterError : public Error {
public:
    using Error::Error;
};

// Queue has no steady state: lambda * n >= 1 - epsilon.
class StabilityError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

// A pointwise evaluation could not produce a trustworthy value
// (non-removable pole, ill-conditioned dense evaluation).
class EvaluationError : public Error {
public:
    using Error::Error;
};

// A numeric procedure detected that its own output is unreliable
// (series recursion divergence, vanishing denominators at s = 1).
class NumericInstabilityError : public Error {
public:
    using Error::Error;
};

// Tail approximation requested at or below the distribution mean.
class BelowMeanError : public Error {
public:
    using Error::Error;
};

// Iterative root finding failed to converge or to bracket a root.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Optimization target cannot be met anywhere in the feasible set.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// A runtime-checked modeling assumption (e.g. monotonicity) failed.
class AssumptionViolationError : public Error {
public:
    using Error::Error;
};

// Simulation produced no samples after warmup.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

} // namespace shortpkt
