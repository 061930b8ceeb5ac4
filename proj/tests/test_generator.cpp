#include "perhom/builtin_models.hpp"
#include "perhom/errors.hpp"
#include "perhom/generator.hpp"
#include "perhom/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace perhom;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// L f for f = sin(2 pi x) on asym_atom, written out by hand:
// b f' + c f''/2 + w (f(x + y) - f(x) - y f'(x)), y = 0.4.
double asym_atom_lf(double x) {
    const double b = 0.3 + 0.2 * std::sin(kTwoPi * x);
    const double c = 1.0 + 0.5 * std::cos(kTwoPi * x);
    const double w = 1.0 + 0.5 * std::sin(kTwoPi * x);
    const double f = std::sin(kTwoPi * x);
    const double df = kTwoPi * std::cos(kTwoPi * x);
    const double d2f = -kTwoPi * kTwoPi * f;
    return b * df + 0.5 * c * d2f + w * (std::sin(kTwoPi * (x + 0.4)) - f - 0.4 * df);
}

double sine_error(int n) {
    const LevyTripletModel m = builtin_model("asym_atom");
    const TorusGrid grid(m.geometry(), n);
    const GeneratorMatrix g = assemble(m, grid);
    Vec f(n);
    for (int j = 0; j < n; ++j) f[j] = std::sin(kTwoPi * j / n);
    const Vec gf = apply(g, f);
    double err = 0.0;
    for (int j = 0; j < n; ++j) err = std::max(err, std::abs(gf[j] - asym_atom_lf(static_cast<double>(j) / n)));
    return err;
}

}  // namespace

TEST(Generator, RowSumsVanishOnBuiltins) {
    for (const auto& name : builtin_model_names()) {
        if (name.rfind("bad_", 0) == 0) continue;
        const LevyTripletModel m = builtin_model(name);
        const GeneratorMatrix g = assemble(m, default_grid(m));
        EXPECT_LE(g.max_row_sum(), 1e-12 * g.norm_inf()) << name;
        // not monotone: central differences of a pure drift, and the cross-derivative stencil
        if (name == "deterministic" || name == "aniso2d") continue;
        for (int k = 0; k < g.matrix.outerSize(); ++k) {
            for (SparseMatrix::InnerIterator it(g.matrix, k); it; ++it) {
                if (it.row() != it.col()) EXPECT_GE(it.value(), 0.0) << name;
            }
        }
    }
}

TEST(Generator, SecondOrderConsistencyOnSineTest) {
    double prev = sine_error(32);
    for (int n : {64, 128, 256}) {
        const double e = sine_error(n);
        const double order = std::log2(prev / e);
        EXPECT_GE(order, 1.9) << "n = " << n;
        prev = e;
    }
}

TEST(Generator, ApplyLocalAgreesWithMatrixRows) {
    const LevyTripletModel m = builtin_model("aniso2d");
    const TorusGrid grid = default_grid(m);
    const GeneratorMatrix g = assemble(m, grid);
    auto f = [](const double* x) { return std::cos(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]) + 0.3 * std::sin(kTwoPi * x[1]); };
    Vec fv(static_cast<Eigen::Index>(grid.size()));
    double x[2];
    for (std::size_t j = 0; j < grid.size(); ++j) {
        grid.node(j, x);
        fv[static_cast<Eigen::Index>(j)] = f(x);
    }
    const Vec gf = apply(g, fv);
    for (std::size_t j : {0ul, 17ul, 500ul, grid.size() - 1}) {
        EXPECT_NEAR(apply_local(m, grid, j, f), gf[static_cast<Eigen::Index>(j)], 1e-9) << j;
    }
}

TEST(Generator, MultiWorkerAssemblyIsIdentical) {
    const LevyTripletModel m = builtin_model("stable_like");
    const TorusGrid grid(m.geometry(), 128);
    const GeneratorMatrix a = assemble(m, grid, {1});
    const GeneratorMatrix b = assemble(m, grid, {3});
    EXPECT_EQ((a.matrix - b.matrix).norm(), 0.0);
}

TEST(Generator, CoarseGridRejectsAtoms) {
    // atom at 0.1 needs 2h <= 0.1
    const LevyTripletModel m("short_atom", TorusGeometry({1.0}), DriftField({TrigField(0.0)}),
                             DiffusionField(1, {TrigField(1.0)}), JumpKernel::atoms(1, {Atom{TrigField(1.0), {0.1}}}));
    try {
        assemble(m, TorusGrid(m.geometry(), 16));
        FAIL() << "expected ResolutionTooCoarse";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ResolutionTooCoarse);
    }
    EXPECT_NO_THROW(assemble(m, TorusGrid(m.geometry(), 20)));
}

TEST(Transition, IsStochasticAndNonNegative) {
    const LevyTripletModel m = builtin_model("asym_atom");
    const GeneratorMatrix g = assemble(m, TorusGrid(m.geometry(), 64));
    const TransitionMatrix p = build_transition(g, 0.5);
    const Mat dense = build_transition_dense(g, 0.5);
    const Mat sparse = Mat(p.matrix);
    EXPECT_LE((sparse - dense).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_GE(dense.minCoeff(), 0.0);
    EXPECT_LE((dense.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_GE(p.log2_substeps, transition_substeps(g, 0.5));
}

TEST(Transition, TwoStateChainMatchesClosedForm) {
    // rates a = 1 (0 -> 1), b = 3 (1 -> 0): P_t(0, 1) = a / (a + b) (1 - e^{-(a + b) t})
    SparseMatrix q(2, 2);
    q.insert(0, 0) = -1.0;
    q.insert(0, 1) = 1.0;
    q.insert(1, 0) = 3.0;
    q.insert(1, 1) = -3.0;
    const GeneratorMatrix g = GeneratorMatrix::from_matrix(q);
    const Mat p = build_transition_dense(g, 0.7, 20);
    EXPECT_NEAR(p(0, 1), 0.25 * (1.0 - std::exp(-4.0 * 0.7)), 1e-6);
    EXPECT_NEAR(p(1, 0), 0.75 * (1.0 - std::exp(-4.0 * 0.7)), 1e-6);
}

TEST(Transition, NegativeOffDiagonalIsRejected) {
    SparseMatrix q(2, 2);
    q.insert(0, 0) = 1.0;
    q.insert(0, 1) = -1.0;
    q.insert(1, 0) = 1.0;
    q.insert(1, 1) = -1.0;
    try {
        transition_substeps(GeneratorMatrix::from_matrix(q), 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PositivityUnachievable);
    }
}

TEST(Dump, CoordinateFormatHasHeaderAndAllEntries) {
    const LevyTripletModel m = builtin_model("harmonic");
    const GeneratorMatrix g = assemble(m, TorusGrid(m.geometry(), 16));
    std::ostringstream out;
    write_coordinate_dump(out, g);
    std::istringstream in(out.str());
    std::string line;
    long entries = 0;
    bool saw_size = false;
    while (std::getline(in, line)) {
        if (line.rfind('#', 0) == 0) {
            if (line == "# size 16 " + std::to_string(g.matrix.nonZeros())) saw_size = true;
            continue;
        }
        ++entries;
    }
    EXPECT_TRUE(saw_size) << out.str().substr(0, 400);
    EXPECT_EQ(entries, g.matrix.nonZeros());
}
