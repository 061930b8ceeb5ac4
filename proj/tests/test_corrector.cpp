#include "perhom/builtin_models.hpp"
#include "perhom/corrector.hpp"
#include "perhom/errors.hpp"
#include "perhom/verify.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace perhom;

namespace {

constexpr double kPi = std::numbers::pi;

struct Solved {
    LevyTripletModel model;
    TorusGrid grid;
    GeneratorMatrix g;
    InvariantMeasure pi;
};

Solved prepare(const std::string& name, int n) {
    Solved s{builtin_model(name), {}, {}, {}};
    s.grid = TorusGrid(s.model.geometry(), n);
    s.g = assemble(s.model, s.grid);
    s.pi = solve_invariant(s.g);
    return s;
}

}  // namespace

TEST(Poisson, BrownianSineHasClosedForm) {
    // (1/2) u'' = sin(2 pi x) => u = -sin(2 pi x) / (2 pi^2), up to O(h^2).
    const Solved s = prepare("bm", 256);
    Vec rhs(256);
    for (int j = 0; j < 256; ++j) rhs[j] = std::sin(2.0 * kPi * j / 256.0);
    const PoissonSolution sol = solve_poisson(s.g, rhs, s.pi);
    for (int j = 0; j < 256; j += 17) {
        EXPECT_NEAR(sol.u[j], -rhs[j] / (2.0 * kPi * kPi), 2e-5) << j;
    }
    EXPECT_LE(sol.residual, 1e-10 * rhs.cwiseAbs().maxCoeff());
    EXPECT_NEAR(s.pi.weights.dot(sol.u), 0.0, 1e-15);
}

TEST(Poisson, IncompatibleRightHandSide) {
    const Solved s = prepare("bm", 64);
    const Vec rhs = Vec::Ones(64);
    try {
        solve_poisson(s.g, rhs, s.pi);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IncompatibleRhs);
    }
}

TEST(Corrector, SineDriftMatchesQuadratureOracle) {
    // b = sin(2 pi x), c = 1: pi ~ e^{-2V}, V = cos(2 pi x) / (2 pi), and
    // beta' = 1 - e^{2V} / int e^{2V}, where int_0^1 e^{cos(2 pi x)/pi} dx = I_0(1/pi).
    const Solved s = prepare("sine_drift", 256);
    const CorrectorField corr = solve_corrector(s.model, s.g, s.pi, s.grid);
    const double z = boost::math::cyl_bessel_i(0, 1.0 / kPi);
    EXPECT_FALSE(corr.identically_zero);
    EXPECT_NEAR(corr.mean_drift[0], 0.0, 1e-14);
    for (int j = 0; j < 256; ++j) {
        const double x = j / 256.0;
        const double expected = 1.0 - std::exp(std::cos(2.0 * kPi * x) / kPi) / z;
        EXPECT_NEAR(corr.grad_at(static_cast<std::size_t>(j), 0, 0), expected, 1e-4) << j;
    }
}

TEST(Corrector, ResidualCenteringAndProjection) {
    for (const char* name : {"sine_drift", "asym_atom", "stable_like", "aniso2d"}) {
        const LevyTripletModel m = builtin_model(name);
        const TorusGrid grid = default_grid(m);
        const GeneratorMatrix g = assemble(m, grid);
        const InvariantMeasure pi = solve_invariant(g);
        const CorrectorField corr = solve_corrector(m, g, pi, grid);
        const Mat bstar = drift_star_on_grid(m, grid);
        for (int i = 0; i < m.dim(); ++i) {
            const Vec rhs = bstar.col(i).array() - corr.mean_drift[i];
            const Vec r = apply(g, Vec(corr.beta.col(i))) - rhs;
            EXPECT_LE(r.cwiseAbs().maxCoeff(), 1e-10 * rhs.cwiseAbs().maxCoeff()) << name;
            EXPECT_LE(std::abs(pi.weights.dot(corr.beta.col(i))), 1e-12 * corr.beta.col(i).cwiseAbs().maxCoeff())
                << name;
        }
    }
}

TEST(Corrector, ConstantDriftGivesZeroCorrector) {
    for (const char* name : {"deterministic", "const_levy", "bm", "harmonic"}) {
        const LevyTripletModel m = builtin_model(name);
        const TorusGrid grid = default_grid(m);
        const GeneratorMatrix g = assemble(m, grid);
        const CorrectorField corr = solve_corrector(m, g, solve_invariant(g), grid);
        EXPECT_TRUE(corr.identically_zero) << name;
        EXPECT_EQ(corr.beta.cwiseAbs().maxCoeff(), 0.0) << name;
    }
}

TEST(Corrector, DriftScalingScalesCorrectorLinearly) {
    const Solved s = prepare("sine_drift", 128);
    const Mat bstar = drift_star_on_grid(s.model, s.grid);
    const Vec rhs = bstar.col(0).array() - s.pi.weights.dot(bstar.col(0));
    const PoissonSolver solver(s.g, s.pi);
    const Vec u1 = solver.solve(rhs).u;
    const Vec u3 = solver.solve(3.0 * rhs).u;
    EXPECT_LE((u3 - 3.0 * u1).cwiseAbs().maxCoeff(), 1e-12 * u1.cwiseAbs().maxCoeff());
}

TEST(Resolvent, SequenceConvergesToMinusSolution) {
    const Solved s = prepare("asym_atom", 128);
    const CorrectorField corr = solve_corrector(s.model, s.g, s.pi, s.grid);
    const Vec rhs = drift_star_on_grid(s.model, s.grid).col(0).array() - corr.mean_drift[0];
    const auto steps = resolvent_sweep(s.g, rhs, s.pi, corr.beta.col(0), 12);
    ASSERT_EQ(steps.size(), 13u);
    for (std::size_t k = 1; k < steps.size(); ++k) EXPECT_LT(steps[k].error, steps[k - 1].error);
    // the error is O(lambda)
    EXPECT_NEAR(steps[12].error / steps[11].error, 0.5, 0.05);
}

TEST(Resolvent, FixedPointMatchesDirectSolve) {
    const Solved s = prepare("asym_atom", 256);
    const CorrectorField corr = solve_corrector(s.model, s.g, s.pi, s.grid);
    const Vec rhs = drift_star_on_grid(s.model, s.grid).col(0).array() - corr.mean_drift[0];
    const Vec v = zero_resolvent(s.g, rhs, s.pi, 1e-4);
    const double scale = corr.beta.col(0).cwiseAbs().maxCoeff();
    EXPECT_LE((v - corr.beta.col(0)).cwiseAbs().maxCoeff(), 1e-6 * scale);
}

TEST(Gradient, CentralDifferenceOfSine) {
    const TorusGrid grid(TorusGeometry({2.0}), 128);
    Mat f(128, 1);
    for (int j = 0; j < 128; ++j) f(j, 0) = std::sin(kPi * j * 2.0 / 128.0);
    const Mat d = central_gradient(grid, f);
    for (int j = 0; j < 128; j += 9) EXPECT_NEAR(d(j, 0), kPi * std::cos(kPi * j * 2.0 / 128.0), 2e-3);
}
