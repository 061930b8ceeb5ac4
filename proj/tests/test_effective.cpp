#include "perhom/builtin_models.hpp"
#include "perhom/effective.hpp"
#include "perhom/errors.hpp"
#include "perhom/verify.hpp"

#include <boost/math/quadrature/trapezoidal.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace perhom;

namespace {

constexpr double kPi = std::numbers::pi;

TrigField wave(double c, std::vector<int> k, double ca, double sa) { return TrigField(c, {TrigTerm{std::move(k), ca, sa}}); }

// Anisotropic 2D model; `swap` exchanges the axes (and the wave vectors with them).
LevyTripletModel planar(bool swap) {
    auto k = [&](int a, int b) { return swap ? std::vector<int>{b, a} : std::vector<int>{a, b}; };
    std::vector<TrigField> drift{wave(0.2, k(1, 0), 0.0, 0.3), wave(-0.1, k(0, 1), 0.25, 0.0)};
    TrigField c11 = wave(1.0, k(1, 1), 0.3, 0.0);
    TrigField c22 = wave(0.6, k(1, 0), 0.0, 0.2);
    TrigField c12 = wave(0.1, k(0, 1), 0.05, 0.0);
    std::vector<double> y1{0.3, -0.1};
    std::vector<double> y2{-0.2, 0.25};
    if (swap) {
        std::swap(drift[0], drift[1]);
        std::swap(c11, c22);
        std::swap(y1[0], y1[1]);
        std::swap(y2[0], y2[1]);
    }
    JumpKernel jumps = JumpKernel::atoms(2, {Atom{wave(0.8, k(1, 0), 0.0, 0.3), y1}, Atom{TrigField(0.5), y2}});
    return LevyTripletModel("planar", TorusGeometry({1.0, 1.0}), DriftField(drift), DiffusionField(2, {c11, c12, c22}),
                            std::move(jumps));
}

}  // namespace

TEST(Sigma, ConstantLevyIsExact) {
    const LevyTripletModel m = builtin_model("const_levy");
    const SolvedModel s = solve_model(m, default_grid(m));
    EXPECT_TRUE(s.law.reduced_path_used);
    EXPECT_NEAR(s.law.sigma(0, 0), 1.5, 1e-10);
    EXPECT_NEAR(s.law.t2(0, 0), 0.5, 1e-12);
}

TEST(Sigma, HarmonicMeanMatchesQuadrature) {
    // Sigma = (int_0^1 dx / c)^{-1}; checked against sqrt(3) and an independent quadrature.
    const double integral = boost::math::quadrature::trapezoidal(
        [](double x) { return 1.0 / (2.0 + std::sin(2.0 * kPi * x)); }, 0.0, 1.0, 1e-14);
    ASSERT_NEAR(1.0 / integral, std::sqrt(3.0), 1e-12);
    const LevyTripletModel m = builtin_model("harmonic");
    const SolvedModel s = solve_model(m, TorusGrid(m.geometry(), 256));
    EXPECT_NEAR(s.law.sigma(0, 0), 1.0 / integral, 1e-3 * std::sqrt(3.0));
}

TEST(Sigma, SineDriftMatchesBesselOracle) {
    // Sigma = 1 / (int e^{2V} int e^{-2V}) = I_0(1/pi)^{-2}
    const double i0 = boost::math::cyl_bessel_i(0, 1.0 / kPi);
    const LevyTripletModel m = builtin_model("sine_drift");
    const SolvedModel s = solve_model(m, TorusGrid(m.geometry(), 256));
    EXPECT_NEAR(s.law.sigma(0, 0), 1.0 / (i0 * i0), 1e-4);
    EXPECT_FALSE(s.law.reduced_path_used);
}

TEST(Sigma, GridSequenceIsCauchy) {
    for (const char* name : {"sine_drift", "asym_atom", "stable_like"}) {
        const LevyTripletModel m = builtin_model(name);
        double v[3];
        int i = 0;
        for (int n : {64, 128, 256}) v[i++] = solve_model(m, TorusGrid(m.geometry(), n)).law.sigma(0, 0);
        EXPECT_LT(std::abs(v[2] - v[1]), std::abs(v[1] - v[0])) << name;
    }
}

TEST(Sigma, ReducedAndFullPathsAgreeWhenBetaVanishes) {
    const LevyTripletModel m = builtin_model("const_levy");
    const TorusGrid grid = default_grid(m);
    const SolvedModel s = solve_model(m, grid);
    SigmaOptions full;
    full.allow_reduced = false;
    const EffectiveLaw f = assemble_sigma(m, grid, s.pi, s.corrector, full);
    EXPECT_FALSE(f.reduced_path_used);
    EXPECT_NEAR(f.sigma(0, 0), s.law.sigma(0, 0), 1e-12);
    EXPECT_EQ(f.t3(0, 0), 0.0);
    EXPECT_EQ(f.t4(0, 0), 0.0);
}

TEST(Sigma, AxisSwapPermutesSigma) {
    const LevyTripletModel a = planar(false);
    const LevyTripletModel b = planar(true);
    const TorusGrid grid(a.geometry(), 24);
    const EffectiveLaw la = solve_model(a, grid).law;
    const EffectiveLaw lb = solve_model(b, grid).law;
    Mat p(2, 2);
    p << 0, 1, 1, 0;
    EXPECT_LE((p * la.sigma * p - lb.sigma).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(la.mean_drift[0], lb.mean_drift[1], 1e-12);
    EXPECT_TRUE(la.positive_semidefinite);
    EXPECT_LE(la.symmetry_defect, 1e-3);
}

TEST(Sigma, PositiveSemidefiniteOnBuiltins) {
    for (const auto& name : builtin_model_names()) {
        if (name.rfind("bad_", 0) == 0) continue;
        const LevyTripletModel m = builtin_model(name);
        const EffectiveLaw law = solve_model(m, default_grid(m)).law;
        EXPECT_TRUE(law.positive_semidefinite) << name;
        EXPECT_GE(law.min_eigenvalue, -1e-10) << name;
    }
}

TEST(Sigma, InvalidModelFailsInValidateStage) {
    const LevyTripletModel m = builtin_model("bad_atom");
    try {
        solve_model(m, default_grid(m));
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "validate");
        EXPECT_EQ(e.code(), ErrorCode::ModelInvalid);
    }
}

TEST(ScaledCheck, DiscrepancyShrinksWithEpsilon) {
    const LevyTripletModel m = builtin_model("asym_atom");
    const TorusGrid grid(m.geometry(), 256);
    const SolvedModel s = solve_model(m, grid);
    const TestFunction f(wave(0.0, {1}, 1.0, 0.5), m.geometry().periods());
    const Mat pts = default_slow_points(m.geometry(), 8);
    double prev = INFINITY;
    for (double eps : {0.2, 0.1, 0.05}) {
        const ScaledCheckResult r = scaled_generator_check(m, grid, s.pi, s.corrector, s.law, f, pts, eps);
        EXPECT_TRUE(r.commensurate);
        EXPECT_LT(r.discrepancy, prev) << eps;
        prev = r.discrepancy;
    }
}

TEST(ScaledCheck, BrownianMotionHasOnlyDiscretisationError) {
    const LevyTripletModel m = builtin_model("bm");
    const TorusGrid grid(m.geometry(), 256);
    const SolvedModel s = solve_model(m, grid);
    const TestFunction f(wave(0.0, {1}, 1.0, 0.0), m.geometry().periods());
    const ScaledCheckResult r =
        scaled_generator_check(m, grid, s.pi, s.corrector, s.law, f, default_slow_points(m.geometry()), 0.25);
    // central second difference of cos(2 pi x) at mesh eps h: relative error (2 pi eps h)^2 / 12
    const double h = 0.25 / 256.0;
    EXPECT_LE(r.discrepancy, 2.0 * kPi * kPi * std::pow(2.0 * kPi * h, 2) / 12.0 * 1.01 + 1e-9);
}
