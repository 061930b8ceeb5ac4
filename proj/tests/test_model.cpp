#include "perhom/builtin_models.hpp"
#include "perhom/errors.hpp"
#include "perhom/grid.hpp"
#include "perhom/model_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>

using namespace perhom;

TEST(Torus, WrapIsPeriodicAndInRange) {
    const TorusGeometry g({1.0, 2.5});
    for (double x : {-3.75, -1.0, 0.0, 0.3125, 1.0, 7.25, 1e6 + 0.125}) {
        const double r = g.wrap_coord(x, 0);
        EXPECT_GE(r, 0.0);
        EXPECT_LT(r, 1.0);
        EXPECT_EQ(g.wrap_coord(x + 4.0, 0), g.wrap_coord(x, 0)) << x;
        const double s = g.wrap_coord(x, 1);
        EXPECT_GE(s, 0.0);
        EXPECT_LT(s, 2.5);
    }
    EXPECT_EQ(g.wrap_coord(-1e-300, 0), 0.0);
    EXPECT_DOUBLE_EQ(g.volume(), 2.5);
}

TEST(Grid, IndexRoundTripAndNeighbours) {
    const TorusGrid grid(TorusGeometry({1.0, 2.0}), std::vector<int>{8, 10});
    ASSERT_EQ(grid.size(), 80u);
    int multi[2];
    for (std::size_t j = 0; j < grid.size(); ++j) {
        grid.multi_index(j, multi);
        EXPECT_EQ(grid.index(multi), j);
    }
    // row-major, last axis fastest
    EXPECT_EQ(grid.neighbor(0, 1, 1), 1u);
    EXPECT_EQ(grid.neighbor(0, 0, 1), 10u);
    EXPECT_EQ(grid.neighbor(0, 1, -1), 9u);
    EXPECT_EQ(grid.neighbor(0, 0, -1), 70u);
    EXPECT_DOUBLE_EQ(grid.spacing(1), 0.2);
}

TEST(Grid, InterpolationIsExactForAffineAndPeriodicAtNodes) {
    const TorusGrid grid(TorusGeometry({1.0}), 16);
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::sin(2.0 * std::numbers::pi * j / 16.0);
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double x = j / 16.0;
        EXPECT_NEAR(grid.interpolate(v, &x), v[j], 1e-15);
        const double shifted = x - 3.0;
        EXPECT_NEAR(grid.interpolate(v, &shifted), v[j], 1e-14);
    }
    // halfway between nodes 3 and 4
    const double mid = 3.5 / 16.0;
    EXPECT_NEAR(grid.interpolate(v, &mid), 0.5 * (v[3] + v[4]), 1e-15);
    // wrap-around cell
    const double last = 15.25 / 16.0;
    EXPECT_NEAR(grid.interpolate(v, &last), 0.75 * v[15] + 0.25 * v[0], 1e-15);
}

TEST(Grid, StencilWeightsSumToOne) {
    const TorusGrid grid(TorusGeometry({1.0, 1.0, 1.0}), 6);
    std::array<TorusGrid::Corner, TorusGrid::kMaxCorners> c{};
    const double x[3] = {0.1, 0.999, 0.5};
    const int n = grid.stencil(x, c.data());
    ASSERT_EQ(n, 8);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += c[static_cast<std::size_t>(i)].weight;
    EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(ModelIo, RoundTripIsBitExactForAllBuiltins) {
    for (const auto& name : builtin_model_names()) {
        const LevyTripletModel m = builtin_model(name);
        const std::string text = serialize_model(m);
        const LevyTripletModel back = parse_model(text);
        EXPECT_EQ(back, m) << name;
        EXPECT_EQ(serialize_model(back), text) << name;
        EXPECT_EQ(model_hash(back), model_hash(m)) << name;
    }
}

TEST(ModelIo, ShippedFilesMatchBuiltins) {
    for (const auto& name : builtin_model_names()) {
        const LevyTripletModel file = load_model(std::string(PERHOM_MODELS_DIR) + "/" + name + ".model");
        EXPECT_EQ(file, builtin_model(name)) << name;
        EXPECT_EQ(load_model("builtin:" + name), file) << name;
    }
}

TEST(ModelIo, ParseErrorsAreTyped) {
    auto code_of = [](const std::string& text) {
        try {
            parse_model(text);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    EXPECT_EQ(code_of("{ not json"), ErrorCode::Parse);
    EXPECT_EQ(code_of(R"({"periods": [1.0], "drift": [0.0, 1.0], "diffusion": [[1.0]], "jumps": {"family": "none"}})"),
              ErrorCode::Parse);
    EXPECT_EQ(code_of(R"({"periods": [1.0], "drift": [0.0], "diffusion": [[1.0]], "jumps": {"family": "cauchy"}})"),
              ErrorCode::Parse);
    try {
        load_model("/nonexistent/x.model");
        FAIL() << "expected a parse error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Parse);
    }
}

TEST(Model, SymbolVanishesAtZeroAndMatchesBrownianMotion) {
    for (const auto& name : builtin_model_names()) {
        const LevyTripletModel m = builtin_model(name);
        const Vec x = Vec::Constant(m.dim(), 0.3);
        const Vec xi = Vec::Zero(m.dim());
        EXPECT_EQ(std::abs(eval_symbol(m, x, xi)), 0.0) << name;
    }
    const LevyTripletModel bm = builtin_model("bm");
    const Vec x = Vec::Constant(1, 0.7);
    const Vec xi = Vec::Constant(1, 3.0);
    const auto q = eval_symbol(bm, x, xi);
    EXPECT_NEAR(q.real(), 4.5, 1e-14);
    EXPECT_NEAR(q.imag(), 0.0, 1e-14);
}

TEST(Validation, FlagsBadModelsWithoutThrowing) {
    const TorusGrid g1(TorusGeometry({1.0}), 64);
    const ValidationReport bad = validate(builtin_model("bad_atom"), g1);
    EXPECT_FALSE(bad.ok());
    const ValidationReport bad2 = validate(builtin_model("bad_stable"), g1);
    EXPECT_FALSE(bad2.ok());
    for (const char* name : {"harmonic", "sine_drift", "const_levy", "asym_atom", "stable_like", "convolution", "bm",
                             "deterministic"}) {
        const ValidationReport r = validate(builtin_model(name), g1);
        EXPECT_TRUE(r.ok()) << name;
    }
    const ValidationReport c = validate(builtin_model("const_levy"), g1);
    EXPECT_TRUE(c.symmetric);
    EXPECT_TRUE(c.zero_drift);
    EXPECT_TRUE(c.reduced_sigma_applies());
    EXPECT_NEAR(c.second_moment_sup, 0.5, 1e-15);
    const ValidationReport a = validate(builtin_model("asym_atom"), g1);
    EXPECT_FALSE(a.symmetric);
    EXPECT_FALSE(a.reduced_sigma_applies());
}
