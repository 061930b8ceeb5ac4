#include "perhom/builtin_models.hpp"
#include "perhom/errors.hpp"
#include "perhom/rng.hpp"
#include "perhom/simulate.hpp"
#include "perhom/stats.hpp"
#include "perhom/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace perhom;

namespace {

SolvedModel solve(const char* name) {
    const LevyTripletModel m = builtin_model(name);
    return solve_model(m, default_grid(m));
}

}  // namespace

TEST(Philox, KnownAnswerVectors) {
    using A4 = std::array<std::uint32_t, 4>;
    EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(PathStream, IndependentOfDrawOrderAcrossPaths) {
    PathStream a(9, 4);
    PathStream b(9, 4);
    PathStream other(9, 5);
    for (int i = 0; i < 100; ++i) other();
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        EXPECT_EQ(u, b.uniform());
        EXPECT_GT(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
    PathStream c(9, 4);
    EXPECT_NE(c(), other());
}

TEST(Simulate, BrownianEndpointsAreStandardNormal) {
    const SolvedModel s = solve("bm");
    SimulationConfig cfg;
    cfg.epsilon = 0.5;
    cfg.dt = 0.05;
    cfg.T = 2.0;
    cfg.n_paths = 4000;
    cfg.seed = 5;
    const PathEnsemble e = simulate_paths(builtin_model("bm"), s.law, cfg);
    const SigmaEstimate est = sigma_mc(e);
    EXPECT_NEAR(est.sigma(0, 0), 1.0, 4.0 * est.se(0, 0));
    EXPECT_NEAR(est.mean[0], 0.0, 4.0 * est.mean_se[0]);
    // the characteristic of Brownian motion is deterministic: C_T = T
    EXPECT_NEAR(e.ctilde.col(0).minCoeff(), 2.0, 1e-12);
    EXPECT_NEAR(e.ctilde.col(0).maxCoeff(), 2.0, 1e-12);
}

TEST(Simulate, CompoundPoissonJumpCount) {
    // two atoms of rate 1 over an unscaled horizon of 5: Poisson(10) jumps per path.
    const SolvedModel s = solve("const_levy");
    SimulationConfig cfg;
    cfg.epsilon = 1.0;
    cfg.T = 5.0;
    cfg.dt = 0.01;
    cfg.n_paths = 4000;
    const PathEnsemble e = simulate_paths(builtin_model("const_levy"), s.law, cfg);
    std::vector<double> counts(e.jumps.begin(), e.jumps.end());
    const auto ms = stats::mean_se(counts);
    EXPECT_NEAR(ms.mean, 10.0, 4.0 * ms.se);
    EXPECT_NEAR(ms.se * std::sqrt(4000.0), std::sqrt(10.0), 0.2);
}

TEST(Simulate, DeterministicDriftIsRemovedExactly) {
    const SolvedModel s = solve("deterministic");
    SimulationConfig cfg;
    cfg.epsilon = 0.1;
    cfg.dt = 0.05;
    cfg.n_paths = 3;
    const PathEnsemble e = simulate_paths(builtin_model("deterministic"), s.law, cfg);
    EXPECT_LE(e.endpoints.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(e.ctilde.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Simulate, ConstantCoefficientCharacteristicIsExact) {
    const SolvedModel s = solve("const_levy");
    SimulationConfig cfg;
    cfg.epsilon = 0.2;
    cfg.dt = 0.05;
    cfg.n_paths = 10;
    const PathEnsemble e = simulate_paths(builtin_model("const_levy"), s.law, cfg);
    EXPECT_LE((e.ctilde.array() - 1.5).abs().maxCoeff(), 1e-12);
}

TEST(Simulate, CharacteristicIsSymmetricIn2D) {
    const SolvedModel s = solve("aniso2d");
    SimulationConfig cfg;
    cfg.epsilon = 0.5;
    cfg.dt = 0.02;
    cfg.n_paths = 20;
    const PathEnsemble e = simulate_paths(builtin_model("aniso2d"), s.law, cfg, &s.corrector, &s.grid);
    for (Eigen::Index p = 0; p < e.ctilde.rows(); ++p) EXPECT_EQ(e.ctilde(p, 1), e.ctilde(p, 2));
    const Mat c = e.ctilde_mean();
    EXPECT_GT(c(0, 0), 0.0);
    EXPECT_GT(c(1, 1), 0.0);
}

TEST(Simulate, ResultsDoNotDependOnWorkerCount) {
    const LevyTripletModel m = builtin_model("asym_atom");
    const SolvedModel s = solve("asym_atom");
    SimulationConfig cfg;
    cfg.epsilon = 0.3;
    cfg.dt = 0.02;
    cfg.n_paths = 37;
    cfg.mesh_points = 3;
    cfg.seed = 99;
    const PathEnsemble a = simulate_paths(m, s.law, cfg, &s.corrector, &s.grid);
    cfg.workers = 4;
    const PathEnsemble b = simulate_paths(m, s.law, cfg, &s.corrector, &s.grid);
    EXPECT_EQ((a.endpoints - b.endpoints).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((a.ctilde - b.ctilde).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((a.mesh - b.mesh).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(a.jumps, b.jumps);
}

TEST(Simulate, ErrorsAreTyped) {
    const LevyTripletModel m = builtin_model("asym_atom");
    const SolvedModel s = solve("asym_atom");
    SimulationConfig cfg;
    cfg.epsilon = 0.5;
    cfg.n_paths = 2;
    cfg.dt = 0.1;  // atom rate bound 1.5: 1 - e^{-0.15} > 0.1
    try {
        simulate_paths(m, s.law, cfg, &s.corrector, &s.grid);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::StepTooLarge);
    }
    cfg.dt = 0.01;
    try {
        simulate_paths(m, s.law, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingCorrector);
    }
    cfg.epsilon = 0.0;
    EXPECT_THROW(cfg.validate(), Error);
}

TEST(Simulate, StepCountHitsHorizonExactly) {
    SimulationConfig cfg;
    cfg.epsilon = 0.3;
    cfg.dt = 0.07;
    const SimulationCost c = simulation_cost(cfg);
    const double horizon = 1.0 / 0.09;
    EXPECT_EQ(c.steps_per_path, static_cast<std::uint64_t>(std::ceil(horizon / 0.07)));
}
