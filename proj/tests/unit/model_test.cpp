// Diffusion model: scale exponent, invariant law and ergodicity screen
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "invdist/errors.hpp"
#include "invdist/model.hpp"
#include "oracles.hpp"

using namespace invdist;

namespace {

// OU rebuilt from drift/diffusion handles only, so every law quantity goes through quadrature.
DiffusionModel quadrature_ou() {
    return DiffusionModel([](double x) { return -x; }, [](double) { return 1.0; },
                          [](double) { return 1.0; }, "ou-by-quadrature");
}

DiffusionModel null_drift() {
    return DiffusionModel([](double) { return 0.0; }, [](double) { return 1.0; },
                          [](double) { return 1.0; }, "brownian");
}

DiffusionModel repulsive() {
    return DiffusionModel([](double x) { return x; }, [](double) { return 1.0; },
                          [](double) { return 1.0; }, "repulsive");
}

}  // namespace

// =============================================================================
// Scale exponent and scale function
// =============================================================================

TEST(ScaleExponent, OuValues) {
    const auto m = ou_model();
    EXPECT_EQ(scale_exponent(m, 0.0), 0.0);
    EXPECT_NEAR(scale_exponent(m, 1.0), -1.0, 1e-12);
    EXPECT_NEAR(scale_exponent(m, -2.0), -4.0, 1e-12);
}

TEST(ScaleExponent, QuadratureMatchesClosedForm) {
    const auto closed = ou_model();
    const auto quad = quadrature_ou();
    for (double y : {-3.0, -1.0, 0.5, 2.0, 4.0}) {
        EXPECT_NEAR(scale_exponent(quad, y), scale_exponent(closed, y), 1e-10) << y;
    }
}

TEST(ScaleFunction, OuDawsonIntegral) {
    const auto m = ou_model();
    EXPECT_EQ(scale_function(m, 0.0), 0.0);
    EXPECT_NEAR(scale_function(m, 1.0), oracle::dawson_type_integral(), 1e-10);
    EXPECT_NEAR(scale_function(m, 1.0), 1.4627, 1e-4);
    EXPECT_NEAR(scale_function(m, -1.0), -oracle::dawson_type_integral(), 1e-10);
}

TEST(ScaleFunction, OverflowReportsAbscissa) {
    EXPECT_THROW(scale_function(ou_model(), 40.0), OverflowError);
}

// =============================================================================
// Normalizer and density
// =============================================================================

TEST(NormalizingConstant, Ou) {
    EXPECT_NEAR(normalizing_constant(ou_model()), std::sqrt(std::numbers::pi), 1e-8);
    EXPECT_NEAR(normalizing_constant(quadrature_ou()), std::sqrt(std::numbers::pi), 1e-8);
}

TEST(NormalizingConstant, QuarticTwoTolerances) {
    // int exp(-x^4 / 2) dx = 2^{1/4} Gamma(1/4) / 2.
    const double expected = std::pow(2.0, 0.25) * std::tgamma(0.25) / 2.0;
    EXPECT_NEAR(normalizing_constant(quartic_model()), expected, 1e-9);
    QuadratureSpec loose;
    loose.abs_tol = 1e-6;
    loose.rel_tol = 1e-6;
    auto coarse = quartic_model();
    coarse.with_quadrature(loose);
    EXPECT_NEAR(normalizing_constant(coarse), expected, 1e-5);
}

TEST(NormalizingConstant, NullDriftDiverges) {
    EXPECT_THROW(normalizing_constant(null_drift()), DivergenceError);
}

TEST(InvariantDensity, OuValues) {
    const auto m = ou_model();
    EXPECT_NEAR(invariant_density(m, 0.0), 1.0 / std::sqrt(std::numbers::pi), 1e-12);
    for (double y : {-2.5, -1.0, 0.3, 1.7}) {
        EXPECT_NEAR(invariant_density(m, y), oracle::ou_density(y), 1e-12) << y;
    }
    EXPECT_NEAR(integrate_line([&](double y) { return invariant_density(m, y); }).value, 1.0, 1e-8);
}

TEST(InvariantDensity, ShiftedOuIsTranslated) {
    const auto m = shifted_ou_model(1.5);
    EXPECT_NEAR(invariant_density(m, 1.5), 1.0 / std::sqrt(std::numbers::pi), 1e-10);
    EXPECT_NEAR(invariant_cdf(m, 1.5), 0.5, 1e-9);
}

// =============================================================================
// Distribution function and quantile
// =============================================================================

TEST(InvariantCdf, OuAgainstErfSeries) {
    const auto m = ou_model();
    EXPECT_NEAR(invariant_cdf(m, 0.0), 0.5, 1e-10);
    EXPECT_NEAR(invariant_cdf(m, 1.0), oracle::ou_cdf(1.0), 1e-8);
    EXPECT_NEAR(invariant_cdf(m, 1.0), 0.9213504, 1e-7);
    for (int k = -30; k <= 30; ++k) {
        const double x = 0.1 * k;
        EXPECT_NEAR(invariant_cdf(m, x), oracle::ou_cdf(x), 1e-8) << x;
    }
}

TEST(InvariantCdf, FarTails) {
    const auto m = ou_model();
    EXPECT_LT(invariant_cdf(m, -12.0), 1e-10);
    EXPECT_NEAR(invariant_cdf(m, 12.0), 1.0, 1e-12);
    // Relative accuracy where the tail mass is tiny.
    EXPECT_NEAR(invariant_cdf(m, -5.0) / oracle::ou_cdf_tail(-5.0), 1.0, 1e-6);
    EXPECT_NEAR(invariant_survival(m, 5.0) / oracle::ou_survival_tail(5.0), 1.0, 1e-6);
}

TEST(InvariantCdf, DensityRatios) {
    const auto m = ou_model();
    for (double x : {-9.0, -3.0, 0.0, 2.0, 9.0}) {
        EXPECT_NEAR(lower_density_ratio(m, x) / (oracle::ou_cdf_tail(x) / oracle::ou_density(x)), 1.0,
                    1e-6)
            << x;
        EXPECT_NEAR(upper_density_ratio(m, x) /
                        (oracle::ou_survival_tail(x) / oracle::ou_density(x)),
                    1.0, 1e-6)
            << x;
    }
}

TEST(InvariantQuantile, OuValues) {
    const auto m = ou_model();
    EXPECT_NEAR(invariant_quantile(m, 0.5), 0.0, 1e-8);
    EXPECT_NEAR(invariant_quantile(m, 0.9213504), 1.0, 1e-6);
    EXPECT_THROW(invariant_quantile(m, 0.0), ConfigError);
    EXPECT_THROW(invariant_quantile(m, 1.0), ConfigError);
}

// =============================================================================
// Stationary expectations
// =============================================================================

TEST(StationaryExpectation, OuMoments) {
    const auto m = ou_model();
    EXPECT_NEAR(stationary_expectation(m, [](double) { return 1.0; }), 1.0, 1e-8);
    EXPECT_NEAR(stationary_expectation(m, [](double z) { return z; }), 0.0, 1e-8);
    EXPECT_NEAR(stationary_expectation(m, [](double z) { return z * z; }), 0.5, 1e-8);
}

TEST(StationaryExpectation, MissingMomentDiverges) {
    // Under N(0, 1/2), e^{z^2} is not integrable.
    EXPECT_THROW(stationary_expectation(ou_model(), [](double z) { return std::exp(z * z); }),
                 Error);
}

// =============================================================================
// Ergodicity screen
// =============================================================================

TEST(CheckErgodicity, Ou) {
    const auto r = check_ergodicity(ou_model(), 1.0);
    EXPECT_TRUE(r.es_ok);
    EXPECT_TRUE(r.vs_diverges);
    EXPECT_TRUE(r.g_finite);
    EXPECT_NEAR(r.g_value, std::sqrt(std::numbers::pi), 1e-8);
    EXPECT_FALSE(r.probe_points.empty());
}

TEST(CheckErgodicity, NullDrift) {
    const auto r = check_ergodicity(null_drift(), 1.0);
    EXPECT_TRUE(r.vs_diverges);
    EXPECT_FALSE(r.g_finite);
}

TEST(CheckErgodicity, RepulsiveDrift) { EXPECT_FALSE(check_ergodicity(repulsive(), 1.0).g_finite); }

// =============================================================================
// Catalog and specs
// =============================================================================

TEST(Catalog, MakeModelValidates) {
    ModelSpec spec;
    spec.family = "ou";
    spec.params = {{"theta", 2.0}, {"sigma", 0.5}};
    const auto m = make_model(spec);
    EXPECT_NEAR(m.drift(1.0), -2.0, 1e-15);
    EXPECT_NEAR(m.diffusion(3.0), 0.5, 1e-15);

    spec.params = {{"gamma", 1.0}};
    EXPECT_THROW(make_model(spec), ConfigError);
    spec.family = "levy";
    spec.params.clear();
    EXPECT_THROW(make_model(spec), ConfigError);
    spec.family = "ou";
    spec.params = {{"theta", -1.0}};
    EXPECT_THROW(make_model(spec), ConfigError);
}

TEST(Catalog, SpecRoundTrip) {
    const auto spec = parse_model_spec(R"({"family":"shifted_ou","params":{"mean":1,"theta":2}})");
    EXPECT_EQ(spec.family, "shifted_ou");
    EXPECT_EQ(spec.params.at("mean"), 1.0);
    const auto again = parse_model_spec(to_json_string(spec));
    EXPECT_EQ(again.params, spec.params);
    EXPECT_THROW(parse_model_spec("{"), ConfigError);
    EXPECT_THROW(parse_model_spec(R"({"params":{}})"), ConfigError);
}

TEST(Catalog, InvalidDiffusionIsReported) {
    const DiffusionModel bad([](double x) { return -x; }, [](double x) { return x; },
                             [](double x) { return x * x; }, "degenerate");
    EXPECT_THROW(bad.diffusion(0.0), DomainEvaluationError);
    EXPECT_THROW(bad.diffusion(-1.0), DomainEvaluationError);
}

TEST(InvariantCdf, TableCellEdgesUnderRounding) {
    // Abscissae built as -3 + 0.3 i land within an ulp of table cell edges.
    const auto m = ou_model();
    for (int i = 0; i <= 20; ++i) {
        const double x = -3.0 + 0.3 * i;
        EXPECT_NEAR(invariant_cdf(m, x), oracle::ou_cdf(x), 1e-8) << x;
        EXPECT_NO_THROW(lower_density_ratio(m, x)) << x;
        EXPECT_NO_THROW(upper_density_ratio(m, x)) << x;
    }
}
