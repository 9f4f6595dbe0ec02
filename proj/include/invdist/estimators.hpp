/**
 * @file estimators.hpp
 * @brief Empirical distribution function and the weighted class of unbiased
 *        estimators of the invariant distribution function.
 *
 * For a positive, continuously differentiable weight h the estimator is
 *
 *     F~_T(x) = (1/T) int_0^T R_x(X_t) dX_t + (1/T) int_0^T N_x(X_t) dt,
 *
 * with K_x(y) = int_y^x dv / (sigma^2(v) h(v)),
 *      R_x(y) = 2 1{y < x} K_x(y) h(y),
 *      N_x(y) = 1{y < x} K_x(y) h'(y) sigma^2(y).
 *
 * The stochastic integral is an Ito integral and is discretized with
 * left-endpoint evaluation. F~_T is not clamped to [0, 1].
 */

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "invdist/model.hpp"
#include "invdist/simulate.hpp"

namespace invdist {

enum class WeightKind { polynomial, exponential, constant, custom };

/**
 * @brief The weight h together with h' and, for built-ins, a primitive of 1/h.
 *
 * `primitive` satisfies P' = 1/h; with a constant-diffusion model the kernel
 * primitive is P / sigma^2. `log_slope` is h'/h, kept separately so that
 * N_x stays finite where h itself under- or overflows.
 */
struct WeightFunction {
    WeightKind kind = WeightKind::custom;
    int p = 0;           ///< polynomial: h = 1 + u^{2p}
    double delta = 0.0;  ///< exponential: h = e^{delta u}
    double c = 0.0;      ///< constant: h = c
    RealFunction h;
    RealFunction h_prime;
    RealFunction log_slope;
    RealFunction primitive;  ///< optional
    std::string name;

    static WeightFunction polynomial(int p);
    static WeightFunction exponential(double delta);
    static WeightFunction constant(double c);
    /// `primitive`, when given, must satisfy P' = 1/h.
    static WeightFunction custom(RealFunction h, RealFunction h_prime,
                                 RealFunction primitive = nullptr, std::string name = "custom");

    double eval(double y) const;  ///< h(y); throws DomainEvaluationError unless finite and > 0
};

/**
 * @brief A weight bound to a model: K_x, K_x h, R_x and N_x.
 *
 * Closed form when the weight has a primitive and the model declares a
 * constant sigma^2; signed quadrature of 1/(sigma^2 h) otherwise.
 */
class WeightedKernel {
public:
    WeightedKernel(WeightFunction wf, const DiffusionModel& model);

    double K(double x, double y) const;
    /// K_x(y) h(y).
    double Kh(double x, double y) const;
    double R(double x, double y) const;
    double N(double x, double y) const;

    bool closed_form() const noexcept { return closed_; }
    /// Kernel primitive P / sigma^2; closed-form kernels only.
    double primitive(double y) const;

    const WeightFunction& weight() const noexcept { return wf_; }
    const DiffusionModel& model() const noexcept { return *model_; }

private:
    WeightFunction wf_;
    const DiffusionModel* model_;
    bool closed_ = false;
    double inv_sigma_sq_ = 1.0;
};

double edf(const Path& path, double x);

double kernel_K(const WeightFunction& wf, const DiffusionModel& model, double x, double y);
double coeff_R(const WeightFunction& wf, const DiffusionModel& model, double x, double y);
double coeff_N(const WeightFunction& wf, const DiffusionModel& model, double x, double y);

/// Left-endpoint Ito discretization of F~_T(x) on the path's grid.
double unbiased_estimate(const Path& path, const WeightFunction& wf, const DiffusionModel& model,
                         double x);

/**
 * @brief Evaluates F~_T on many abscissae of one path.
 *
 * Per-step quantities are computed once per path. Weights without a closed
 * kernel use a primitive table on a 1e-3 grid over the path range with
 * linear interpolation.
 */
class UnbiasedEstimator {
public:
    UnbiasedEstimator(WeightFunction wf, const DiffusionModel& model);
    std::vector<double> curve(const Path& path, std::span<const double> xs) const;

private:
    WeightedKernel kernel_;
};

struct EstimatorSpec {
    enum class Kind { edf, unbiased };
    Kind kind = Kind::edf;
    std::optional<WeightFunction> weight;
    std::string text;  ///< canonical spec string

    /// File-name tag: "edf", "unbiased_poly", "unbiased_exp", "unbiased_const".
    std::string tag() const;
};

/// Parses `edf` | `unbiased:poly:p=<int>` | `unbiased:exp:delta=<real>` | `unbiased:const:c=<real>`.
EstimatorSpec parse_estimator_spec(std::string_view text);

struct EstimateCurve {
    std::vector<double> xs;
    std::vector<double> values;
    std::string estimator_tag;
    double horizon_T = 0.0;
};

/// Estimator as a function of (path, abscissae).
using CurveEstimator =
    std::function<std::vector<double>(const Path&, std::span<const double>)>;

CurveEstimator make_curve_estimator(const EstimatorSpec& spec, const DiffusionModel& model);

/// Requires xs strictly increasing.
EstimateCurve estimate_curve(const Path& path, std::span<const double> xs,
                             const EstimatorSpec& spec, const DiffusionModel& model);

struct Cond1Report {
    bool second_moment_finite = false;  ///< E (R_x(xi) sigma(xi))^2 < inf
    bool abs_n_finite = false;          ///< E |N_x(xi)| < inf
    bool boundary_vanishes = false;     ///< R_x sigma^2 f_S -> 0 at -inf
    double second_moment = 0.0;
    double abs_n_moment = 0.0;
    std::vector<double> boundary_probes;  ///< y = -2^k, k = 0..6
    std::vector<double> boundary_values;

    bool all() const noexcept { return second_moment_finite && abs_n_finite && boundary_vanishes; }
};

/// Numerical screen of the integrability conditions behind unbiasedness at x.
Cond1Report check_cond1(const WeightFunction& wf, const DiffusionModel& model, double x);

/// E_S (R_x(xi) sigma(xi))^2.
double r_second_moment(const WeightFunction& wf, const DiffusionModel& model, double x);

}  // namespace invdist
