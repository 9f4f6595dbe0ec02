/**
 * @file numerics.hpp
 * @brief Deterministic numerical kernels: adaptive quadrature on finite and
 *        unbounded intervals, monotone inversion and compensated summation.
 *
 * Everything here is pure and reentrant.
 */

#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace invdist {

using RealFunction = std::function<double(double)>;

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_depth = 40;
    double tail_tol = 1e-12;
    double initial_halfwidth = 8.0;

    /// Throws ConfigError listing every field that violates its bound.
    void validate() const;

    /// Same spec with absolute, relative and tail tolerances replaced.
    QuadratureSpec with_tolerance(double abs, double rel, double tail) const {
        QuadratureSpec s = *this;
        s.abs_tol = abs;
        s.rel_tol = rel;
        s.tail_tol = tail;
        return s;
    }
};

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
};

/**
 * @brief Globally adaptive composite Simpson rule with Richardson correction.
 *
 * The interval with the largest local error estimate is bisected until the
 * summed estimate drops below max(abs_tol, rel_tol*|value|). Intervals that
 * reach `max_depth` are frozen; if tolerance is then unreachable the result
 * is returned with `converged == false`. Jump discontinuities are resolved by
 * repeated bisection of the interval that contains them.
 *
 * Requires a <= b. A non-finite evaluation throws DomainEvaluationError.
 */
QuadResult integrate(const RealFunction& f, double a, double b,
                     const QuadratureSpec& spec = {});

/// Oriented integral: integrate(f, from, to) for from <= to, negated otherwise.
QuadResult integrate_signed(const RealFunction& f, double from, double to,
                            const QuadratureSpec& spec = {});

/// Integral over [a, b] split at every breakpoint strictly inside (a, b).
QuadResult integrate_with_breaks(const RealFunction& f, double a, double b,
                                 std::span<const double> breaks,
                                 const QuadratureSpec& spec = {});

/**
 * @brief Integral over the real line by tail-measured truncation.
 *
 * Starts from [-L, L] with L = initial_halfwidth and doubles L until both
 * chunks [L, 2L] and [-2L, -L] contribute less than tail_tol. Throws
 * DivergenceError once L would exceed 2^20 * initial_halfwidth.
 */
QuadResult integrate_line(const RealFunction& f, const QuadratureSpec& spec = {});

/// Integral over (-inf, x] using the same doubling rule on the left tail.
QuadResult integrate_lower_tail(const RealFunction& f, double x,
                                const QuadratureSpec& spec = {});

/// Integral over [x, +inf).
QuadResult integrate_upper_tail(const RealFunction& f, double x,
                                const QuadratureSpec& spec = {});

/**
 * @brief Solves f(x) = target for nondecreasing f on [lo, hi].
 *
 * Illinois-modified regula falsi with periodic bisection; the bracket is
 * kept at every step. Returns once |f(x) - target| <= tol or the bracket
 * has collapsed to adjacent doubles. Throws BracketError when target lies
 * outside [f(lo), f(hi)].
 */
double invert_monotone(const RealFunction& f, double target, double lo, double hi,
                       double tol);

/// Neumaier (improved Kahan-Babuska) running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }
    /// Folds another partial sum in; used by parallel reductions.
    void merge(const CompensatedSum& other) noexcept {
        add(other.sum_);
        add(other.comp_);
    }
    double value() const noexcept {
        // A non-finite running sum poisons the correction term with NaN.
        if (!std::isfinite(sum_)) return sum_;
        return sum_ + comp_;
    }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/**
 * @brief Compensated sum of a sequence.
 *
 * Non-finite input yields a non-finite result; when `diagnostic` is given it
 * receives the index of the first offending element.
 */
double compensated_sum(std::span<const double> xs, std::string* diagnostic = nullptr);

}  // namespace invdist
