/**
 * @file errors.hpp
 * @brief Exception hierarchy shared by every invdist module.
 *
 * The CLI maps these onto process exit codes: ConfigError -> 2,
 * numerical failures (DivergenceError, DomainEvaluationError, OverflowError,
 * TailError) -> 3, SimulationError -> 4.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace invdist {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or violated precondition supplied by the caller.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A function returned a non-finite value at `abscissa`.
class DomainEvaluationError : public Error {
public:
    DomainEvaluationError(const std::string& what, double abscissa)
        : Error(what), abscissa_(abscissa) {}
    double abscissa() const noexcept { return abscissa_; }

private:
    double abscissa_;
};

/// An unbounded integral did not settle; the integrand is most likely not integrable.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// exp() of the scale exponent overflowed at `abscissa`.
class OverflowError : public Error {
public:
    OverflowError(const std::string& what, double abscissa)
        : Error(what), abscissa_(abscissa) {}
    double abscissa() const noexcept { return abscissa_; }

private:
    double abscissa_;
};

/// Monotone inversion was asked for a target outside the bracket values.
class BracketError : public Error {
public:
    using Error::Error;
};

/// A tail quantity could not be resolved (quantile bracket or density underflow).
class TailError : public Error {
public:
    using Error::Error;
};

/// The Euler scheme produced a non-finite state.
class SimulationError : public Error {
public:
    SimulationError(const std::string& what, std::size_t step)
        : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace invdist
