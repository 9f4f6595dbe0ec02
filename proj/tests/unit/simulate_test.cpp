// Euler-Maruyama paths and substream seeding
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>
#include <vector>

#include "invdist/errors.hpp"
#include "invdist/model.hpp"
#include "invdist/simulate.hpp"
#include "oracles.hpp"

using namespace invdist;

namespace {

DiffusionModel frozen() {
    return DiffusionModel([](double) { return 0.0; }, [](double) { return 1e-12; },
                          [](double) { return 1e-24; }, "frozen");
}

Path constant_path(double value, std::size_t n, double dt = 0.01) {
    Path p;
    p.dt = dt;
    p.values.assign(n + 1, value);
    return p;
}

}  // namespace

// =============================================================================
// Seeding
// =============================================================================

TEST(SubstreamSeed, Deterministic) {
    EXPECT_EQ(derive_substream_seed(42, 7), derive_substream_seed(42, 7));
    EXPECT_NE(derive_substream_seed(42, 0), derive_substream_seed(42, 1));
    EXPECT_NE(derive_substream_seed(42, 0), derive_substream_seed(43, 0));
}

TEST(SubstreamSeed, NoCollisionsOverHundredThousandIndices) {
    std::unordered_set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 100000; ++i) seen.insert(derive_substream_seed(20240611, i));
    EXPECT_EQ(seen.size(), 100000u);
}

// =============================================================================
// Configuration
// =============================================================================

TEST(SimConfig, StepRounding) {
    SimConfig cfg;
    cfg.horizon = 1.0;
    cfg.dt = 0.3;
    EXPECT_EQ(cfg.steps(), 3u);
    cfg.horizon = 100.0;
    cfg.dt = 0.005;
    EXPECT_EQ(cfg.steps(), 20000u);
}

TEST(SimConfig, InvalidSettings) {
    SimConfig cfg;
    cfg.dt = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.dt = 0.1;
    cfg.horizon = 0.01;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.horizon = 1.0;
    cfg.burn_in = 1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);  // burn-in with stationary start
}

// =============================================================================
// Simulation
// =============================================================================

TEST(SimulatePath, FrozenDynamics) {
    SimConfig cfg;
    cfg.horizon = 5.0;
    cfg.dt = 0.01;
    cfg.seed = 3;
    cfg.init = FixedInit{3.0};
    const auto p = simulate_path(frozen(), cfg);
    ASSERT_EQ(p.values.size(), 501u);
    for (double v : p.values) EXPECT_NEAR(v, 3.0, 1e-6);
}

TEST(SimulatePath, BitIdenticalReruns) {
    SimConfig cfg;
    cfg.horizon = 10.0;
    cfg.dt = 0.01;
    cfg.seed = 99;
    cfg.store_wiener = true;
    const auto a = simulate_path(ou_model(), cfg);
    const auto b = simulate_path(ou_model(), cfg);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(*a.wiener_increments, *b.wiener_increments);
    cfg.seed = 100;
    EXPECT_NE(simulate_path(ou_model(), cfg).values, a.values);
}

TEST(SimulatePath, MeanReversionFromFarStart) {
    // Transition law N(10 e^{-10}, (1 - e^{-20}) / 2): P(|X_T| >= 3) ~ 2e-5.
    SimConfig cfg;
    cfg.horizon = 10.0;
    cfg.dt = 0.01;
    cfg.init = FixedInit{10.0};
    int inside = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        cfg.seed = derive_substream_seed(5, s);
        const auto p = simulate_path(ou_model(), cfg);
        inside += std::abs(p.values.back()) < 3.0 ? 1 : 0;
    }
    EXPECT_GE(inside, 99);
}

TEST(SimulatePath, ExplosionReportsStep) {
    const DiffusionModel blowup([](double x) { return x * x * x; }, [](double) { return 1.0; },
                                [](double) { return 1.0; }, "explosive");
    SimConfig cfg;
    cfg.horizon = 10.0;
    cfg.dt = 0.1;
    cfg.init = FixedInit{5.0};
    try {
        simulate_path(blowup, cfg);
        FAIL() << "expected SimulationError";
    } catch (const SimulationError& e) {
        EXPECT_LT(e.step(), 100u);
    }
}

TEST(SimulatePath, StationaryMarginalKolmogorovSmirnov) {
    // X at t = 1 across 500 stationary starts; 1% critical value 1.628 / sqrt(500).
    const auto model = ou_model();
    SimConfig cfg;
    cfg.horizon = 1.0;
    cfg.dt = 0.01;
    std::vector<double> xs;
    for (std::uint64_t s = 0; s < 500; ++s) {
        cfg.seed = derive_substream_seed(11, s);
        xs.push_back(simulate_path(model, cfg).values.back());
    }
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = oracle::ou_cdf(xs[i]);
        d = std::max({d, std::abs(f - static_cast<double>(i) / 500.0),
                      std::abs(f - static_cast<double>(i + 1) / 500.0)});
    }
    EXPECT_LT(d, 1.628 / std::sqrt(500.0));
}

TEST(SimulateFromIncrements, CoarseningKeepsBrownianPath) {
    const std::vector<double> fine = {0.1, -0.2, 0.05, 0.3};
    const auto coarse = coarsen_increments(fine);
    ASSERT_EQ(coarse.size(), 2u);
    EXPECT_DOUBLE_EQ(coarse[0], -0.1);
    EXPECT_DOUBLE_EQ(coarse[1], 0.35);
    EXPECT_THROW(coarsen_increments(std::vector<double>{1.0, 2.0, 3.0}), ConfigError);

    const auto p = simulate_from_increments(ou_model(), 1.0, 0.5, coarse);
    EXPECT_DOUBLE_EQ(p.values[1], 1.0 - 0.5 - 0.1);
    EXPECT_EQ(p.wiener_increments->size(), 2u);
}

// =============================================================================
// Occupation averages
// =============================================================================

TEST(OccupationMean, TrivialCases) {
    EXPECT_DOUBLE_EQ(occupation_mean(constant_path(2.0, 50), [](double x) { return x; }), 2.0);
    SimConfig cfg;
    cfg.horizon = 3.0;
    const auto p = simulate_path(ou_model(), cfg);
    EXPECT_DOUBLE_EQ(occupation_mean(p, [](double) { return 1.0; }), 1.0);
    EXPECT_THROW(occupation_mean(p, [](double) { return NAN; }), DomainEvaluationError);
}

TEST(OccupationMean, OuSecondMoment) {
    SimConfig cfg;
    cfg.horizon = 200.0;
    cfg.dt = 0.01;
    double sum = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        cfg.seed = derive_substream_seed(17, s);
        sum += occupation_mean(simulate_path(ou_model(), cfg), [](double z) { return z * z; });
    }
    EXPECT_NEAR(sum / 20.0, 0.5, 0.05);
}

TEST(OccupationMean, LongerHorizonMovesTowardTruth) {
    const auto batch_error = [](double T) {
        SimConfig cfg;
        cfg.horizon = T;
        cfg.dt = 0.01;
        double err = 0.0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            cfg.seed = derive_substream_seed(23, s);
            err += std::abs(occupation_mean(simulate_path(ou_model(), cfg),
                                            [](double z) { return z * z; }) -
                            0.5);
        }
        return err / 20.0;
    };
    EXPECT_LT(batch_error(200.0), batch_error(50.0));
}

// =============================================================================
// CSV
// =============================================================================

TEST(PathCsv, RoundTrip) {
    SimConfig cfg;
    cfg.horizon = 0.05;
    cfg.dt = 0.01;
    cfg.store_wiener = true;
    const auto p = simulate_path(ou_model(), cfg);
    std::stringstream ss;
    write_path_csv(ss, p);
    const std::string text = ss.str();
    EXPECT_EQ(text.rfind("t,x,dW\r\n", 0), 0u);
    const auto q = read_path_csv(ss);
    EXPECT_EQ(q.values, p.values);
    EXPECT_EQ(*q.wiener_increments, *p.wiener_increments);
    EXPECT_NEAR(q.dt, p.dt, 1e-15);

    std::stringstream bad("time,value\r\n0,1\r\n");
    EXPECT_THROW(read_path_csv(bad), ConfigError);
}
