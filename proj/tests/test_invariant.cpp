#include "perhom/builtin_models.hpp"
#include "perhom/errors.hpp"
#include "perhom/invariant.hpp"
#include "perhom/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace perhom;

namespace {

GeneratorMatrix two_state(double a, double b) {
    SparseMatrix q(2, 2);
    q.insert(0, 0) = -a;
    q.insert(0, 1) = a;
    q.insert(1, 0) = b;
    q.insert(1, 1) = -b;
    return GeneratorMatrix::from_matrix(q);
}

}  // namespace

TEST(Invariant, TwoStateChain) {
    const GeneratorMatrix g = two_state(1.0, 3.0);
    const InvariantMeasure pi = solve_invariant(g);
    EXPECT_NEAR(pi.weights[0], 0.75, 1e-15);
    EXPECT_NEAR(pi.weights[1], 0.25, 1e-15);
    EXPECT_EQ(pi.method, "bordered-lu");
}

TEST(Invariant, UniformForTranslationInvariantModels) {
    for (const char* name : {"bm", "const_levy", "bm2"}) {
        const LevyTripletModel m = builtin_model(name);
        const TorusGrid grid = default_grid(m);
        const InvariantMeasure pi = solve_invariant(assemble(m, grid));
        const double u = 1.0 / static_cast<double>(grid.size());
        EXPECT_LE((pi.weights.array() - u).abs().maxCoeff(), 1e-13 * u * grid.size()) << name;
    }
}

TEST(Invariant, HarmonicDensityIsInverseDiffusivity) {
    // pi is proportional to 1/c with c = 2 + sin(2 pi x); normalising constant int 1/c = 1/sqrt(3).
    const LevyTripletModel m = builtin_model("harmonic");
    const TorusGrid grid(m.geometry(), 256);
    const InvariantMeasure pi = solve_invariant(assemble(m, grid));
    const double h = 1.0 / 256.0;
    for (int j : {0, 40, 64, 128, 192, 255}) {
        const double x = j * h;
        const double density = std::sqrt(3.0) / (2.0 + std::sin(2.0 * std::numbers::pi * x));
        EXPECT_NEAR(pi.weights[j] / h, density, 2e-4 * density) << j;
    }
    EXPECT_NEAR(pi.weights[0] / h, std::sqrt(3.0) / 2.0, 2e-4);
}

TEST(Invariant, ResidualNormalisationAndPositivity) {
    for (const auto& name : builtin_model_names()) {
        if (name.rfind("bad_", 0) == 0 || name == "deterministic") continue;
        const LevyTripletModel m = builtin_model(name);
        const GeneratorMatrix g = assemble(m, default_grid(m));
        const InvariantMeasure pi = solve_invariant(g);
        EXPECT_LE(pi.residual, 1e-10) << name;
        EXPECT_GE(pi.weights.minCoeff(), 0.0) << name;
        EXPECT_NEAR(pi.weights.sum(), 1.0, 1e-14) << name;
        const Vec r = g.matrix.transpose() * pi.weights;
        EXPECT_LE(r.cwiseAbs().maxCoeff(), 1e-10) << name;
    }
}

TEST(Invariant, PowerIterationAgreesFromRandomStarts) {
    const LevyTripletModel m = builtin_model("asym_atom");
    const GeneratorMatrix g = assemble(m, TorusGrid(m.geometry(), 64));
    const InvariantMeasure direct = solve_invariant(g);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        Vec start(64);
        for (int j = 0; j < 64; ++j) start[j] = u(rng);
        const InvariantMeasure it = power_iteration(g, start);
        EXPECT_EQ(it.method, "power-iteration");
        EXPECT_LE(tv_distance(it.weights, direct.weights), 1e-7) << trial;
    }
}

TEST(Invariant, ReducibleGeneratorIsRejected) {
    // two disconnected 2-cycles
    SparseMatrix q(4, 4);
    q.insert(0, 0) = -1.0;
    q.insert(0, 1) = 1.0;
    q.insert(1, 0) = 1.0;
    q.insert(1, 1) = -1.0;
    q.insert(2, 2) = -1.0;
    q.insert(2, 3) = 1.0;
    q.insert(3, 2) = 1.0;
    q.insert(3, 3) = -1.0;
    const GeneratorMatrix g = GeneratorMatrix::from_matrix(q);
    EXPECT_FALSE(strongly_connected(g));
    try {
        solve_invariant(g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ReducibleGenerator);
    }
    EXPECT_TRUE(strongly_connected(two_state(1.0, 2.0)));
}

TEST(Ergodicity, TwoStateGapEqualsTotalRate) {
    const GeneratorMatrix g = two_state(1.0, 1.0);
    const InvariantMeasure pi = solve_invariant(g);
    const ErgodicityEstimate e = estimate_ergodicity(g, pi);
    ASSERT_TRUE(e.spectral_gap.has_value());
    EXPECT_NEAR(*e.spectral_gap, 2.0, 1e-12);
    EXPECT_NEAR(e.gamma, 2.0, 1e-12);
    // TV(P_t(0, .), pi) = e^{-2t} / 2 exactly, so the fit recovers the rate.
    EXPECT_NEAR(e.fit_gamma, 2.0, 1e-3);
    EXPECT_NEAR(e.Gamma, 0.5, 1e-3);
}

TEST(Ergodicity, BrownianGapIsTwoPiSquared) {
    // L = (1/2) d^2/dx^2 on the unit circle: slowest mode e^{2 pi i x}, rate 2 pi^2.
    const LevyTripletModel m = builtin_model("bm");
    const GeneratorMatrix g = assemble(m, TorusGrid(m.geometry(), 256));
    const InvariantMeasure pi = solve_invariant(g);
    const ErgodicityEstimate e = estimate_ergodicity(g, pi);
    const double expected = 2.0 * std::numbers::pi * std::numbers::pi;
    EXPECT_EQ(e.method, "spectral-gap");
    EXPECT_NEAR(e.gamma, expected, 1e-3 * expected);
    EXPECT_NEAR(e.fit_gamma, expected, 0.05 * expected);
    for (std::size_t k = 1; k < e.tv.size(); ++k) EXPECT_LE(e.tv[k], e.tv[k - 1] + 1e-15);
}

TEST(Ergodicity, ShortHorizonIsReported) {
    const LevyTripletModel m = builtin_model("bm");
    const GeneratorMatrix g = assemble(m, TorusGrid(m.geometry(), 32));
    const InvariantMeasure pi = solve_invariant(g);
    try {
        estimate_ergodicity(g, pi, 1e-4);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::HorizonTooShort);
    }
}
