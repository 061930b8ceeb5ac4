#include "perhom/builtin_models.hpp"
#include "perhom/errors.hpp"
#include "perhom/report.hpp"
#include "perhom/stats.hpp"
#include "perhom/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace perhom;

TEST(Stats, MeanSeAndNormalCdf) {
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    const auto ms = stats::mean_se(xs);
    EXPECT_DOUBLE_EQ(ms.mean, 2.5);
    EXPECT_NEAR(ms.se, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
    EXPECT_NEAR(stats::normal_cdf(1.959963984540054), 0.975, 1e-12);
    EXPECT_NEAR(stats::kolmogorov_sf(1.3580986393225505), 0.05, 1e-6);
    EXPECT_NEAR(stats::chi_squared_sf(3.841458820694124, 1.0), 0.05, 1e-12);
}

TEST(Stats, KsAcceptsNormalAndRejectsShift) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    std::vector<double> xs(5000);
    for (auto& x : xs) x = n(rng);
    EXPECT_GT(stats::ks_normal(xs).p_value, 0.01);
    for (auto& x : xs) x += 0.2;
    EXPECT_LT(stats::ks_normal(xs).p_value, 1e-6);
}

TEST(Stats, PseudoInverseRootWhitens) {
    Mat s(2, 2);
    s << 2.0, 0.5, 0.5, 1.0;
    const auto r = stats::pseudo_inverse_root(s);
    EXPECT_EQ(r.rank, 2);
    EXPECT_LE((r.root * s * r.root.transpose() - Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((r.root - r.root.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    Mat singular = Mat::Zero(2, 2);
    singular(0, 0) = 4.0;
    const auto q = stats::pseudo_inverse_root(singular);
    EXPECT_EQ(q.rank, 1);
    EXPECT_EQ(q.root.rows(), 1);
    EXPECT_NEAR(std::abs(q.root(0, 0)), 0.5, 1e-15);
}

namespace {

std::vector<PathEnsemble> sweep(const LevyTripletModel& m, const SolvedModel& s, std::vector<double> eps,
                                std::size_t n, double dt) {
    std::vector<PathEnsemble> out;
    for (double e : eps) {
        SimulationConfig cfg;
        cfg.epsilon = e;
        cfg.dt = dt;
        cfg.n_paths = n;
        cfg.seed = 17;
        out.push_back(simulate_paths(m, s.law, cfg, &s.corrector, &s.grid));
    }
    return out;
}

}  // namespace

TEST(Etp2, TooFewPathsIsAnError) {
    const LevyTripletModel m = builtin_model("asym_atom");
    const SolvedModel s = solve_model(m, default_grid(m));
    const auto ens = sweep(m, s, {0.5, 0.4}, 3, 0.02);
    try {
        check_etp2(ens, s.law, 1e-6);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientPaths);
    }
}

TEST(Etp2, ExactModelPasses) {
    const LevyTripletModel m = builtin_model("const_levy");
    const SolvedModel s = solve_model(m, default_grid(m));
    const Etp2Result r = check_etp2(sweep(m, s, {0.2, 0.1}, 50, 0.05), s.law, 0.05);
    EXPECT_TRUE(r.within);
    EXPECT_TRUE(r.monotone);
    EXPECT_TRUE(r.passed);
}

TEST(Etp1, VacuousWithoutJumps) {
    const LevyTripletModel m = builtin_model("harmonic");
    const SolvedModel s = solve_model(m, default_grid(m));
    const Etp1Result r = check_etp1(sweep(m, s, {0.2, 0.1}, 20, 0.05), 0.01);
    EXPECT_TRUE(r.vacuous);
    EXPECT_TRUE(r.passed);
}

TEST(Etp1, BoundedAtomCountsVanishBelowCutoff) {
    // |eps (y - dbeta)| <= eps (|y| + 2 |beta|_inf) < delta once eps < delta / (|y| + 2 |beta|_inf)
    const LevyTripletModel m = builtin_model("asym_atom");
    const SolvedModel s = solve_model(m, default_grid(m));
    const double beta_sup = s.corrector.beta.cwiseAbs().maxCoeff();
    const double cutoff = 0.5 / (0.4 + 2.0 * beta_sup);
    ASSERT_GT(cutoff, 1.0);
    const auto ens = sweep(m, s, {1.0, 0.5}, 200, 0.02);
    for (const auto& e : ens) EXPECT_EQ(e.large_jumps.cwiseAbs().maxCoeff(), 0.0);
    const Etp1Result r = check_etp1(ens, 0.01);
    EXPECT_TRUE(r.decreasing);
    EXPECT_TRUE(r.passed);
    // at threshold 0.1 the jumps of size ~0.4 count at eps = 1 and not below 0.25
    SimulationConfig cfg;
    cfg.epsilon = 1.0;
    cfg.dt = 0.02;
    cfg.n_paths = 50;
    cfg.deltas = {0.1};
    const PathEnsemble big = simulate_paths(m, s.law, cfg, &s.corrector, &s.grid);
    EXPECT_GT(big.large_jumps.sum(), 0.0);
}

TEST(Etp1, EnvelopeNeedsSmallCorrector) {
    const LevyTripletModel m = builtin_model("stable_like");
    const SolvedModel s = solve_model(m, default_grid(m));
    Etp1BoundInputs in{10.0, 1.0, s.corrector.beta.cwiseAbs().maxCoeff(), &m, &s.grid};
    const double b1 = etp1_envelope(in, 0.05, 0.5, 1.0);
    EXPECT_TRUE(std::isfinite(b1));
    EXPECT_GE(b1, 0.0);
    // tail beyond R_cut is empty once delta / (2 eps) > 2
    EXPECT_EQ(b1, 0.0);
    in.beta_sup = 100.0;
    EXPECT_TRUE(std::isnan(etp1_envelope(in, 0.05, 0.5, 1.0)));
}

TEST(Gaussianity, DegenerateLawIsVacuous) {
    const LevyTripletModel m = builtin_model("deterministic");
    const SolvedModel s = solve_model(m, default_grid(m));
    const auto ens = sweep(m, s, {0.2}, 1000, 0.05);
    const GaussianityResult g = check_gaussianity(ens.back(), s.law);
    EXPECT_EQ(g.rank, 0);
    EXPECT_TRUE(g.vacuous);
    EXPECT_TRUE(g.passed);
}

TEST(Report, SchemaAndVerdictsAreStable) {
    VerifyConfig cfg;
    cfg.epsilons = {0.5, 0.25};
    cfg.sim.n_paths = 1000;
    cfg.sim.dt = 0.05;
    cfg.sim.seed = 3;
    const VerificationReport rep = full_report(builtin_model("const_levy"), cfg);
    const nlohmann::json j = to_json(rep);
    EXPECT_EQ(j.at("schema"), kReportSchema);
    for (const char* key : {"model", "config", "invariant", "corrector", "effective_law", "sigma_mc", "etp2", "etp1",
                            "gaussianity", "verdicts", "passed"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    std::vector<std::string> names;
    for (const auto& v : j.at("verdicts")) names.push_back(v.at("name"));
    EXPECT_EQ(names, (std::vector<std::string>{"sigma-psd", "etp2", "etp1", "gaussianity"}));
    EXPECT_EQ(j.at("etp2").at("rows").size(), 2u);
    EXPECT_FALSE(j.at("config").at("simulation").contains("workers"));
    // same config, more workers: identical serialisation
    VerifyConfig cfg4 = cfg;
    cfg4.sim.workers = 4;
    EXPECT_EQ(to_json(full_report(builtin_model("const_levy"), cfg4)).dump(), j.dump());
}
