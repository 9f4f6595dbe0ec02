/**
 * @file efficiency.hpp
 * @brief Local minimax variance R_S(x,x), the global bound rho_*(S), the
 *        martingale-representation machinery behind the efficiency of the
 *        unbiased class, and the Monte Carlo integrated risk.
 *
 * Notation used throughout:
 *   influence(x, y) = F_S(x ^ y) - F_S(x) F_S(y)
 *   R_S(x,x)       = 4 E_S [influence(x, xi) / (sigma(xi) f_S(xi))]^2
 *   H_x(y)         = 2 int_0^y influence(x, v) / (sigma^2(v) f_S(v)) dv
 *   G_x(y)         = 2 int_0^y 1{v < x} K_x(v) h(v) dv
 *   M_x            = G_x + H_x,   m = M_x'
 *   c_x(y)         = 1{y < x} K_x(y) [2 h(y) S(y) + h'(y) sigma^2(y)] - F_S(x)
 *   d_x(y)         = 2 1{y < x} h(y) K_x(y) sigma(y)
 * M_x solves M' S + M'' sigma^2 / 2 = c_x with M_x(0) = 0.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "invdist/estimators.hpp"
#include "invdist/model.hpp"
#include "invdist/simulate.hpp"

namespace invdist {

struct NuMeasure {
    enum class Kind { gaussian, uniform, point_masses };
    Kind kind = Kind::gaussian;
    double mean = 0.0;
    double sd = 1.0;
    double a = 0.0;
    double b = 1.0;
    std::vector<std::pair<double, double>> atoms;  ///< (x, weight)
    double total_mass = 1.0;

    static NuMeasure gaussian(double mean, double sd, double mass = 1.0);
    static NuMeasure uniform(double a, double b, double mass = 1.0);
    static NuMeasure point_masses(std::vector<std::pair<double, double>> atoms);

    void validate() const;
    /// Lebesgue density of a continuous measure (mass included).
    double density(double x) const;
    /// nu-mass outside [lo, hi].
    double mass_outside(double lo, double hi) const;
    /// Canonical CLI form: `gauss:m,s` | `uniform:a,b` | `points:x@w;x@w`.
    std::string to_string() const;
};

/// Parses the CLI form; a mass suffix `*m` is accepted for continuous kinds.
NuMeasure parse_nu_spec(const std::string& text);

/// int g dnu.
double integrate_nu(const NuMeasure& nu, const RealFunction& g, const QuadratureSpec& spec = {});

double influence_numerator(const DiffusionModel& model, double x, double y);

/// influence(x, y) / f_S(y), evaluated without forming the ratio of two underflowing numbers.
double influence_over_density(const DiffusionModel& model, double x, double y);

/// R_S(x, x). Throws DivergenceError when the integral is infinite.
double local_variance(const DiffusionModel& model, double x);

/// rho_*(S) = int R_S(x, x) nu(dx).
double efficiency_bound(const DiffusionModel& model, const NuMeasure& nu);

/// Tolerances used by the representation identities unless overridden.
QuadratureSpec identity_spec();

double H_func(const DiffusionModel& model, double x, double y,
              const QuadratureSpec& spec = identity_spec());
double G_func(const WeightFunction& wf, const DiffusionModel& model, double x, double y,
              const QuadratureSpec& spec = identity_spec());
double M_func(const WeightFunction& wf, const DiffusionModel& model, double x, double y,
              const QuadratureSpec& spec = identity_spec());
/// M_x(y) as one quadrature of m over [0, y] instead of G + H.
double M_single_integral(const WeightFunction& wf, const DiffusionModel& model, double x, double y,
                         const QuadratureSpec& spec = identity_spec());

/// m(z) = 2 / (f sigma^2)(z) * int_{-inf}^z c_x(v) f_S(v) dv.
double m_direct(const WeightFunction& wf, const DiffusionModel& model, double x, double z,
                const QuadratureSpec& spec = identity_spec());
/// m(z) = 2 1{z < x} h(z) K_x(z) + 2 influence(x, z) / (sigma^2 f)(z).
double m_closed(const WeightFunction& wf, const DiffusionModel& model, double x, double z);

double coeff_c(const WeightFunction& wf, const DiffusionModel& model, double x, double y);
double coeff_d(const WeightFunction& wf, const DiffusionModel& model, double x, double y);

/// M'(y) S(y) + M''(y) sigma^2(y) / 2 - c_x(y) with central differences of M_func.
double ode_residual(const WeightFunction& wf, const DiffusionModel& model, double x, double y,
                    double step = 1e-4);

struct RepresentationCheck {
    double lhs = 0.0;          ///< sqrt(T) (F~_T(x) - F_S(x))
    double boundary = 0.0;     ///< (M(X_T) - M(X_0)) / sqrt(T)
    double martingale = 0.0;   ///< -T^{-1/2} sum 2 influence / (sigma f) dW
    double discrepancy = 0.0;  ///< |lhs - boundary - martingale|
};

/// Requires stored Wiener increments.
RepresentationCheck pathwise_representation_check(const Path& path, const WeightFunction& wf,
                                                  const DiffusionModel& model, double x);

struct ConditionCheck {
    bool ok = false;
    double value = 0.0;
    std::string detail;
};

/// Settings for the nested condition screens.
QuadratureSpec screen_spec();

/// int E_S H_x(xi)^2 nu(dx) < inf.
ConditionCheck check_Q2(const DiffusionModel& model, const NuMeasure& nu,
                        const QuadratureSpec& spec = screen_spec());
/// int E_S G_x(xi)^2 nu(dx) < inf.
ConditionCheck check_Q3(const WeightFunction& wf, const DiffusionModel& model, const NuMeasure& nu,
                        const QuadratureSpec& spec = screen_spec());

struct RiskReport {
    std::string estimator;  ///< spec text
    std::string tag;
    std::vector<double> xs;
    std::vector<double> bias;
    std::vector<double> scaled_variance;  ///< T * var of the error
    std::vector<double> local_bound;      ///< R_S(x, x)
    double scaled_risk = 0.0;             ///< T * E int error^2 dnu
    double bound = 0.0;                   ///< rho_*
    double ratio = 0.0;
    std::size_t replications = 0;
    std::size_t aborted = 0;
    double horizon_T = 0.0;
    double dt = 0.0;
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> path_seeds;
};

struct NamedEstimator {
    std::string tag;
    std::string spec_text;
    CurveEstimator curve;
};

/**
 * @brief Monte Carlo integrated risk for several estimators on common paths.
 *
 * Replication r simulates with seed derive_substream_seed(sim.seed, r), so
 * every estimator sees identical paths. The nu-integral uses trapezoid
 * weights on `xs` (or the atoms themselves for point masses). Reductions run
 * in replication order with compensated sums, so results do not depend on
 * `workers`. A replication whose path explodes is dropped; more than 1%
 * dropped raises SimulationError.
 */
std::vector<RiskReport> empirical_risk(const DiffusionModel& model,
                                       std::span<const NamedEstimator> estimators,
                                       const NuMeasure& nu, const SimConfig& sim,
                                       std::size_t replications, std::span<const double> xs,
                                       unsigned workers = 1);

/// Single-estimator convenience overload.
RiskReport empirical_risk(const DiffusionModel& model, const EstimatorSpec& estimator,
                          const NuMeasure& nu, const SimConfig& sim, std::size_t replications,
                          std::span<const double> xs, unsigned workers = 1);

NamedEstimator named_estimator(const EstimatorSpec& spec, const DiffusionModel& model);

/// Weights w_j with sum_j w_j g(x_j) ~ int g dnu.
std::vector<double> nu_grid_weights(const NuMeasure& nu, std::span<const double> xs);

/// RiskReport as JSON text (keys: xs, bias, scaled_variance, local_bound, scaled_risk, bound, ratio, config).
std::string risk_report_json(const RiskReport& report);
/// `x,bias,scaled_variance,local_bound` rows.
void write_risk_csv(std::ostream& os, const RiskReport& report);

}  // namespace invdist
