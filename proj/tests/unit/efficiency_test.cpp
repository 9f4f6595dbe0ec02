// Local variance, efficiency bound, representation identities and Monte Carlo risk
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "invdist/efficiency.hpp"
#include "invdist/errors.hpp"
#include "oracles.hpp"

using namespace invdist;

namespace {

std::vector<double> grid(double lo, double hi, int count) {
    std::vector<double> xs;
    for (int i = 0; i < count; ++i) xs.push_back(lo + (hi - lo) * i / (count - 1));
    return xs;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

// =============================================================================
// Measures
// =============================================================================

TEST(NuMeasure, ParseAndPrint) {
    const auto g = parse_nu_spec("gauss:0,1");
    EXPECT_EQ(g.kind, NuMeasure::Kind::gaussian);
    EXPECT_EQ(g.to_string(), "gauss:0,1");
    const auto u = parse_nu_spec("uniform:-1,2*3");
    EXPECT_EQ(u.kind, NuMeasure::Kind::uniform);
    EXPECT_EQ(u.total_mass, 3.0);
    const auto p = parse_nu_spec("points:1@0.5;-1@0.25");
    EXPECT_EQ(p.atoms.size(), 2u);
    EXPECT_EQ(p.atoms.front().first, -1.0);
    EXPECT_EQ(p.total_mass, 0.75);
    for (const char* bad : {"gauss", "gauss:0", "gauss:0,-1", "uniform:2,1", "points:1", "points:1@-1",
                            "cauchy:0,1", "gauss:a,1"}) {
        EXPECT_THROW(parse_nu_spec(bad), ConfigError) << bad;
    }
}

TEST(NuMeasure, GridWeights) {
    const auto xs = grid(-5.0, 5.0, 101);
    double total = 0.0;
    for (double w : nu_grid_weights(NuMeasure::gaussian(0.0, 1.0), xs)) total += w;
    EXPECT_NEAR(total, 1.0, 1e-3);
    EXPECT_THROW(nu_grid_weights(NuMeasure::gaussian(0.0, 1.0), grid(-4.0, 4.0, 81)), ConfigError);
    const auto atoms = NuMeasure::point_masses({{1.0, 2.0}});
    const auto w = nu_grid_weights(atoms, xs);
    EXPECT_EQ(w[60], 2.0);
    EXPECT_THROW(nu_grid_weights(NuMeasure::point_masses({{0.123, 1.0}}), xs), ConfigError);
}

// =============================================================================
// Influence numerator and local variance
// =============================================================================

TEST(Influence, Values) {
    const auto m = ou_model();
    const double f1 = invariant_cdf(m, 1.0);
    EXPECT_NEAR(influence_numerator(m, 1.0, 1.0), f1 * (1.0 - f1), 1e-12);
    EXPECT_NEAR(influence_numerator(m, -12.0, 0.4), 0.0, 1e-9);
    EXPECT_NEAR(influence_numerator(m, 0.0, 1.0), 0.0393248, 1e-7);
}

TEST(Influence, RatioMatchesQuotientInBulk) {
    const auto m = ou_model();
    for (double x : {-1.0, 0.0, 0.7}) {
        for (double y : {-2.5, -0.3, 0.0, 1.1, 2.9}) {
            EXPECT_NEAR(influence_over_density(m, x, y),
                        influence_numerator(m, x, y) / invariant_density(m, y), 1e-10);
        }
    }
}

TEST(LocalVariance, Tails) {
    const auto m = ou_model();
    EXPECT_LT(local_variance(m, -12.0), 1e-8);
    EXPECT_LT(local_variance(m, 12.0), 1e-8);
    for (double x : {-3.0, -1.5, 0.0, 2.0, 3.0}) EXPECT_GT(local_variance(m, x), 0.0);
}

TEST(LocalVariance, OuAtMedianAgainstTrapezoid) {
    const double oracle_value = oracle::ou_local_variance(0.0);
    EXPECT_LT(rel(local_variance(ou_model(), 0.0), oracle_value), 1e-6);
    // Regression target; the value equals ln(2) / 2 to the printed digits.
    EXPECT_NEAR(local_variance(ou_model(), 0.0), 0.34657359, 1e-7);
}

TEST(LocalVariance, Symmetry) {
    const auto m = ou_model();
    for (double x : {0.5, 1.0}) EXPECT_NEAR(local_variance(m, x), local_variance(m, -x), 1e-8);
}

// =============================================================================
// Efficiency bound
// =============================================================================

TEST(EfficiencyBound, PointMasses) {
    const auto m = ou_model();
    EXPECT_NEAR(efficiency_bound(m, NuMeasure::point_masses({{0.4, 1.0}})), local_variance(m, 0.4),
                1e-15);
    EXPECT_NEAR(efficiency_bound(m, NuMeasure::point_masses({{-1.0, 1.0}, {1.0, 1.0}})),
                2.0 * local_variance(m, 1.0), 1e-10);
}

TEST(EfficiencyBound, GaussianAgainstDoubleTrapezoid) {
    // Outer trapezoid over x on [-7, 7] with the N(0,1) weight; inner oracle per x.
    const double outer = oracle::trapezoid(
        [](double x) {
            return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi) *
                   oracle::ou_local_variance(x, 40000);
        },
        -7.0, 7.0, 700);
    EXPECT_LT(rel(efficiency_bound(ou_model(), NuMeasure::gaussian(0.0, 1.0)), outer), 1e-5);
}

TEST(EfficiencyBound, UniformAgainstTrapezoid) {
    const double outer = oracle::trapezoid(
        [](double x) { return 0.5 * oracle::ou_local_variance(x, 40000); }, -1.0, 1.0, 200);
    EXPECT_LT(rel(efficiency_bound(ou_model(), NuMeasure::uniform(-1.0, 1.0)), outer), 1e-5);
}

// =============================================================================
// H, G, M
// =============================================================================

TEST(HFunc, Values) {
    const auto m = ou_model();
    EXPECT_EQ(H_func(m, 0.0, 0.0), 0.0);
    const double oracle_value =
        2.0 * oracle::trapezoid([](double v) { return oracle::ou_influence(0.0, v) / oracle::ou_density(v); },
                                0.0, 1.0, 200000);
    EXPECT_LT(rel(H_func(m, 0.0, 1.0), oracle_value), 1e-6);
}

TEST(HFunc, SignFollowsDirection) {
    // The influence numerator is positive, so H_x runs with the sign of y.
    const auto m = ou_model();
    EXPECT_GT(H_func(m, 0.0, 1.0), 0.0);
    EXPECT_LT(H_func(m, 0.0, -1.0), 0.0);
    EXPECT_NEAR(H_func(m, 0.0, -1.0), -H_func(m, 0.0, 1.0), 1e-10);
}

TEST(GFunc, ConstantWeightClosedForm) {
    const auto m = ou_model();
    const auto wf = WeightFunction::constant(1.0);
    EXPECT_EQ(G_func(wf, m, 1.0, 0.0), 0.0);
    EXPECT_NEAR(G_func(wf, m, 1.0, 2.0), 1.0, 1e-10);
    EXPECT_NEAR(G_func(wf, m, 2.0, 1.0), 3.0, 1e-10);
    for (double x : {0.5, 1.0, 2.5}) {
        for (double y : {-2.0, -0.3, 0.4, 1.7, 3.0}) {
            const double mn = std::min(x, y);
            EXPECT_NEAR(G_func(wf, m, x, y), 2.0 * x * mn - mn * mn, 1e-8) << x << " " << y;
        }
    }
    // For x < 0 the indicator is empty on [0, y] when y >= 0.
    EXPECT_EQ(G_func(wf, m, -1.0, 2.0), 0.0);
    EXPECT_NEAR(G_func(wf, m, -1.0, -2.0), -1.0, 1e-10);
}

TEST(MFunc, Decomposition) {
    const auto m = ou_model();
    for (const auto& wf : {WeightFunction::exponential(1.0), WeightFunction::polynomial(1)}) {
        EXPECT_EQ(M_func(wf, m, 0.3, 0.0), 0.0);
        for (double y : {-2.2, -0.5, 0.1, 0.3, 1.4, 2.6}) {
            EXPECT_NEAR(M_func(wf, m, 0.3, y), G_func(wf, m, 0.3, y) + H_func(m, 0.3, y), 1e-15);
            EXPECT_NEAR(M_func(wf, m, 0.3, y), M_single_integral(wf, m, 0.3, y), 1e-9);
        }
    }
}

TEST(MFunc, OdeResidual) {
    const auto m = ou_model();
    const auto wf = WeightFunction::exponential(1.0);
    EXPECT_LT(std::abs(ode_residual(wf, m, 0.0, 1.0)), 1e-3);
    for (int i = 0; i < 20; ++i) {
        const double y = -2.85 + 0.3 * i;
        EXPECT_LT(std::abs(ode_residual(wf, m, 0.0, y)), 1e-3) << y;
        EXPECT_LT(std::abs(ode_residual(WeightFunction::polynomial(1), m, 1.0, y)), 1e-3) << y;
    }
}

// =============================================================================
// m, c, d
// =============================================================================

TEST(MDensity, DirectMatchesClosed) {
    const auto m = ou_model();
    for (const auto& wf : {WeightFunction::exponential(1.0), WeightFunction::polynomial(1)}) {
        for (double z : {-2.0, -1.0, 0.5, 1.0, 2.0}) {
            EXPECT_LT(rel(m_direct(wf, m, 0.0, z), m_closed(wf, m, 0.0, z)), 1e-6) << wf.name << " " << z;
        }
    }
}

TEST(MDensity, LeftTailVanishes) {
    const auto m = ou_model();
    const auto wf = WeightFunction::exponential(1.0);
    const double z = -8.0;
    EXPECT_NEAR(m_direct(wf, m, 0.0, z) * invariant_density(m, z), 0.0, 1e-9);
}

TEST(MDensity, ClosedFormValues) {
    const auto m = ou_model();
    const auto wf = WeightFunction::exponential(1.0);
    EXPECT_NEAR(m_closed(wf, m, 0.0, 0.0), 0.5 * std::sqrt(std::numbers::pi), 1e-10);
    EXPECT_NEAR(m_closed(wf, m, 0.0, 0.0), 0.8862269, 1e-7);
    for (double z : {0.5, 1.5}) {
        EXPECT_NEAR(m_closed(wf, m, 0.0, z),
                    2.0 * influence_numerator(m, 0.0, z) / invariant_density(m, z), 1e-10);
    }
}

TEST(Compensator, Values) {
    const auto m = ou_model();
    const auto wf = WeightFunction::exponential(1.0);
    EXPECT_NEAR(coeff_c(wf, m, 0.5, 0.7), -invariant_cdf(m, 0.5), 1e-15);
    EXPECT_EQ(coeff_d(wf, m, 0.5, 0.7), 0.0);
    for (double x : {-1.0, 0.0, 1.0}) {
        EXPECT_NEAR(stationary_expectation(m, [&](double y) { return coeff_c(wf, m, x, y); }), 0.0,
                    2e-6);
    }
    for (double y : {-3.0, -0.2, 0.4}) {
        EXPECT_NEAR(coeff_d(wf, m, 0.5, y), coeff_R(wf, m, 0.5, y) * m.diffusion(y), 1e-12);
    }
}

// =============================================================================
// Pathwise representation
// =============================================================================

TEST(Representation, FrozenPathAboveThreshold) {
    Path p;
    p.dt = 0.01;
    p.values.assign(1001, 3.0);
    p.wiener_increments.emplace(1000, 0.0);
    const auto rc = pathwise_representation_check(p, WeightFunction::exponential(1.0), ou_model(), -12.0);
    EXPECT_LT(rc.discrepancy, 1e-8);
}

TEST(Representation, RequiresIncrements) {
    Path p;
    p.dt = 0.01;
    p.values.assign(11, 0.0);
    EXPECT_THROW(pathwise_representation_check(p, WeightFunction::exponential(1.0), ou_model(), 0.0),
                 ConfigError);
}

TEST(Representation, SmallDiscrepancyOnOuPaths) {
    const auto m = ou_model();
    SimConfig cfg;
    cfg.horizon = 5.0;
    cfg.dt = 1e-3;
    cfg.store_wiener = true;
    double ss = 0.0;
    double lhs_ss = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        cfg.seed = derive_substream_seed(55, s);
        const auto rc = pathwise_representation_check(simulate_path(m, cfg),
                                                      WeightFunction::exponential(1.0), m, 0.0);
        ss += rc.discrepancy * rc.discrepancy;
        lhs_ss += rc.lhs * rc.lhs;
    }
    EXPECT_LT(std::sqrt(ss / 10.0), 0.05);
    EXPECT_GT(std::sqrt(lhs_ss / 10.0), 0.1);  // the identity is not trivially 0 = 0
}

// =============================================================================
// Condition screens
// =============================================================================

TEST(Conditions, OuGaussian) {
    const auto m = ou_model();
    const auto nu = NuMeasure::gaussian(0.0, 1.0);
    const auto q2 = check_Q2(m, nu);
    EXPECT_TRUE(q2.ok) << q2.detail;
    EXPECT_GT(q2.value, 0.0);
    for (const auto& wf : {WeightFunction::exponential(1.0), WeightFunction::polynomial(1),
                           WeightFunction::constant(1.0)}) {
        const auto q3 = check_Q3(wf, m, nu);
        EXPECT_TRUE(q3.ok) << wf.name << ": " << q3.detail;
        // Second tolerance level agrees.
        QuadratureSpec tighter = screen_spec();
        tighter.abs_tol = 1e-8;
        tighter.rel_tol = 1e-8;
        EXPECT_NEAR(check_Q3(wf, m, nu, tighter).value, q3.value, 1e-4 * q3.value);
    }
}

// =============================================================================
// Monte Carlo risk
// =============================================================================

TEST(EmpiricalRisk, TruthStubHasZeroRisk) {
    const auto m = ou_model();
    NamedEstimator stub{"truth", "truth", [&m](const Path&, std::span<const double> xs) {
                            std::vector<double> out;
                            for (double x : xs) out.push_back(invariant_cdf(m, x));
                            return out;
                        }};
    SimConfig sim;
    sim.horizon = 2.0;
    sim.dt = 0.01;
    const auto xs = grid(-1.0, 1.0, 3);
    const NamedEstimator one[] = {stub};
    const auto r = empirical_risk(m, one, NuMeasure::point_masses({{0.0, 1.0}}), sim, 4, xs).front();
    EXPECT_EQ(r.scaled_risk, 0.0);
    EXPECT_EQ(r.ratio, 0.0);
    EXPECT_GT(r.bound, 0.0);
}

TEST(EmpiricalRisk, PointMassIsScaledMse) {
    const auto m = ou_model();
    SimConfig sim;
    sim.horizon = 10.0;
    sim.dt = 0.01;
    sim.seed = 8;
    const auto xs = grid(-1.0, 1.0, 5);
    const auto nu = NuMeasure::point_masses({{-0.5, 1.0}, {0.5, 2.0}});
    const auto spec = parse_estimator_spec("edf");
    const auto r = empirical_risk(m, spec, nu, sim, 6, xs);
    double mse_a = 0.0;
    double mse_b = 0.0;
    for (std::uint64_t k = 0; k < 6; ++k) {
        SimConfig c = sim;
        c.seed = derive_substream_seed(sim.seed, k);
        const auto p = simulate_path(m, c);
        mse_a += std::pow(edf(p, -0.5) - invariant_cdf(m, -0.5), 2);
        mse_b += std::pow(edf(p, 0.5) - invariant_cdf(m, 0.5), 2);
    }
    EXPECT_NEAR(r.scaled_risk, 10.0 * (mse_a + 2.0 * mse_b) / 6.0, 1e-12);
    EXPECT_NEAR(r.bound, local_variance(m, -0.5) + 2.0 * local_variance(m, 0.5), 1e-12);
}

TEST(EmpiricalRisk, WorkerCountDoesNotChangeResults) {
    const auto m = ou_model();
    SimConfig sim;
    sim.horizon = 5.0;
    sim.dt = 0.01;
    sim.seed = 21;
    const auto xs = grid(-5.0, 5.0, 41);
    const auto nu = NuMeasure::gaussian(0.0, 1.0);
    const std::vector<NamedEstimator> ests = {named_estimator(parse_estimator_spec("edf"), m),
                                              named_estimator(parse_estimator_spec("unbiased:exp:delta=1"), m)};
    const auto a = empirical_risk(m, ests, nu, sim, 9, xs, 1);
    const auto b = empirical_risk(m, ests, nu, sim, 9, xs, 3);
    ASSERT_EQ(a.size(), 2u);
    for (std::size_t e = 0; e < 2; ++e) {
        EXPECT_EQ(a[e].bias, b[e].bias);
        EXPECT_EQ(a[e].scaled_variance, b[e].scaled_variance);
        EXPECT_EQ(a[e].scaled_risk, b[e].scaled_risk);
        EXPECT_EQ(a[e].path_seeds, a[0].path_seeds);  // paired paths
    }
    EXPECT_EQ(risk_report_json(a[1]), risk_report_json(b[1]));
}

TEST(EmpiricalRisk, Preconditions) {
    const auto m = ou_model();
    SimConfig sim;
    sim.horizon = 1.0;
    const auto spec = parse_estimator_spec("edf");
    EXPECT_THROW(empirical_risk(m, spec, NuMeasure::gaussian(0.0, 1.0), sim, 1, grid(-5, 5, 11)),
                 ConfigError);
    EXPECT_THROW(empirical_risk(m, spec, NuMeasure::gaussian(0.0, 1.0), sim, 4, grid(-2, 2, 11)),
                 ConfigError);
}

TEST(EmpiricalRisk, ExplodingReplicationsFailTheRun) {
    // Euler on -x^3 with dt = 0.9 is unstable beyond |x| ~ 1.5.
    const auto m = quartic_model();
    SimConfig sim;
    sim.horizon = 90.0;
    sim.dt = 0.9;
    EXPECT_THROW(empirical_risk(m, parse_estimator_spec("edf"), NuMeasure::point_masses({{0.0, 1.0}}),
                                sim, 20, grid(-1, 1, 3)),
                 SimulationError);
}

TEST(EmpiricalRisk, ReportFormats) {
    RiskReport r;
    r.xs = {0.0, 1.0};
    r.bias = {0.1, -0.2};
    r.scaled_variance = {1.0, 2.0};
    r.local_bound = {0.3, 0.4};
    r.scaled_risk = 0.5;
    r.bound = 0.25;
    r.ratio = 2.0;
    const auto j = nlohmann::json::parse(risk_report_json(r));
    for (const char* key : {"xs", "bias", "scaled_variance", "local_bound", "scaled_risk", "bound",
                            "ratio", "config"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    std::ostringstream os;
    write_risk_csv(os, r);
    EXPECT_EQ(os.str(), "x,bias,scaled_variance,local_bound\r\n0,0.10000000000000001,1,0.29999999999999999\r\n"
                        "1,-0.20000000000000001,2,0.40000000000000002\r\n");
}
