/**
 * @file model.hpp
 * @brief Scalar diffusion dX = S(X) dt + sigma(X) dW and its invariant law.
 *
 * The invariant density is
 *     f_S(y) = exp{2 int_0^y S/sigma^2} / (G(S) sigma^2(y)),
 * with normalizer G(S) = int exp{2 int_0^x S/sigma^2} / sigma^2(x) dx.
 * Everything here is computed by quadrature from the drift and diffusion
 * handles; catalog models additionally carry the scale exponent in closed
 * form so that per-step evaluations inside path loops stay cheap.
 */

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "invdist/numerics.hpp"

namespace invdist {

namespace detail {
struct LawCache;
}

class DiffusionModel {
public:
    DiffusionModel(RealFunction drift, RealFunction diffusion, RealFunction diffusion_sq,
                   std::string label);

    /// Declares a closed form of y -> 2 int_0^y S(v)/sigma^2(v) dv.
    DiffusionModel& with_scale_exponent(RealFunction closed_form);
    /// Declares sigma^2 to be constant; enables closed-form weight kernels.
    DiffusionModel& with_constant_diffusion_sq(double value);
    /// Quadrature settings used for every law quantity of this model.
    DiffusionModel& with_quadrature(const QuadratureSpec& spec);

    double drift(double x) const;
    /// sigma(x); throws DomainEvaluationError unless finite and > 0.
    double diffusion(double x) const;
    double diffusion_sq(double x) const;

    const std::string& label() const noexcept { return label_; }
    bool has_closed_scale_exponent() const noexcept { return static_cast<bool>(scale_exponent_); }
    const RealFunction& closed_scale_exponent() const noexcept { return scale_exponent_; }
    std::optional<double> constant_diffusion_sq() const noexcept { return constant_sigma_sq_; }
    const QuadratureSpec& quadrature() const noexcept { return quad_; }

    detail::LawCache& cache() const { return *cache_; }

private:
    RealFunction drift_;
    RealFunction diffusion_;
    RealFunction diffusion_sq_;
    std::string label_;
    RealFunction scale_exponent_;
    std::optional<double> constant_sigma_sq_;
    QuadratureSpec quad_;
    // Write-once caches (G(S), cumulative table); shared between copies.
    std::shared_ptr<detail::LawCache> cache_;
};

struct ErgodicityReport {
    bool es_ok = false;
    bool vs_diverges = false;
    bool g_finite = false;
    double g_value = 0.0;
    double a_fit = 0.0;  ///< max over the probe grid of (x S(x) + sigma^2(x)) / (1 + x^2)
    std::vector<double> probe_points;
};

/// 2 int_0^y S(v)/sigma^2(v) dv (oriented).
double scale_exponent(const DiffusionModel& model, double y);

/// V_S(x) = int_0^x exp{-scale_exponent(y)} dy. Throws OverflowError when exp saturates.
double scale_function(const DiffusionModel& model, double x);

/// G(S); cached per model. Throws DivergenceError when the integral is infinite.
double normalizing_constant(const DiffusionModel& model);

/// exp{scale_exponent(y)} / sigma^2(y), i.e. G(S) f_S(y).
double unnormalized_density(const DiffusionModel& model, double y);

/// log of unnormalized_density; finite even where the density underflows.
double log_unnormalized_density(const DiffusionModel& model, double y);

double invariant_density(const DiffusionModel& model, double y);

/// F_S(x), clamped to [0, 1].
double invariant_cdf(const DiffusionModel& model, double x);

/// 1 - F_S(x), computed from the right tail so it keeps relative accuracy for large x.
double invariant_survival(const DiffusionModel& model, double x);

/// F_S(x) / f_S(x), stable where both underflow.
double lower_density_ratio(const DiffusionModel& model, double x);

/// (1 - F_S(x)) / f_S(x), stable where both underflow.
double upper_density_ratio(const DiffusionModel& model, double x);

/// x with |F_S(x) - u| <= 1e-10. Requires 0 < u < 1.
double invariant_quantile(const DiffusionModel& model, double u);

/**
 * @brief E_S g(xi) = int g(z) f_S(z) dz.
 *
 * Abscissae where f_S underflows to zero contribute nothing. Throws
 * DivergenceError when the moment does not exist.
 */
double stationary_expectation(const DiffusionModel& model, const RealFunction& g);
double stationary_expectation(const DiffusionModel& model, const RealFunction& g,
                              const QuadratureSpec& spec);

/**
 * @brief Numerical screen of the existence/ergodicity conditions.
 *
 * Probes radii probe_radius * 2^k, k = 0..6. The growth bound is accepted
 * when the largest ratio on the outermost shell does not exceed twice the
 * largest ratio seen inside it; V_S is accepted as divergent when its
 * increments between successive radii do not decay geometrically (or exp
 * saturates). This is a screen, not a proof.
 */
ErgodicityReport check_ergodicity(const DiffusionModel& model, double probe_radius = 1.0);

// Catalog ----------------------------------------------------------------

/// S(x) = -theta x, sigma = s.
DiffusionModel ou_model(double theta = 1.0, double sigma = 1.0);
/// S(x) = -x^3, sigma = 1.
DiffusionModel quartic_model();
/// S(x) = -theta (x - mean), sigma = s.
DiffusionModel shifted_ou_model(double mean, double theta = 1.0, double sigma = 1.0);

struct ModelSpec {
    std::string family = "ou";  ///< "ou" | "quartic" | "shifted_ou"
    std::map<std::string, double> params;
};

/// Builds a catalog model; throws ConfigError on unknown family or parameter.
DiffusionModel make_model(const ModelSpec& spec);

/// Parses { "family": ..., "params": { ... } }.
ModelSpec parse_model_spec(const std::string& json_text);
std::string to_json_string(const ModelSpec& spec);

}  // namespace invdist
