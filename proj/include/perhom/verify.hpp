#pragma once

#include "perhom/corrector.hpp"
#include "perhom/effective.hpp"
#include "perhom/generator.hpp"
#include "perhom/invariant.hpp"
#include "perhom/model.hpp"
#include "perhom/simulate.hpp"
#include "perhom/stats.hpp"

#include <optional>
#include <string>
#include <vector>

namespace perhom {

/// Everything the solver side produces for one model on one grid.
struct SolvedModel {
    TorusGrid grid;
    ValidationReport validation;
    GeneratorMatrix generator;
    InvariantMeasure pi;
    CorrectorField corrector;
    EffectiveLaw law;
};

/// Default grid: 256 nodes per axis in d = 1, 32 in d = 2, 12 otherwise.
TorusGrid default_grid(const LevyTripletModel& model, const std::vector<int>& resolution = {});

/// validate -> assemble -> invariant -> corrector -> sigma. Failures are
/// rethrown as StageError tagged with the stage name.
SolvedModel solve_model(const LevyTripletModel& model, const TorusGrid& grid, unsigned workers = 1);

struct Etp2Row {
    double epsilon = 0.0;
    Mat mean;         ///< ensemble mean of the modified second characteristic at T
    Mat se;
    Mat discrepancy;  ///< mean - T Sigma
};

struct Etp2Result {
    std::vector<Etp2Row> rows;  ///< decreasing epsilon
    Mat target;                 ///< T Sigma (symmetric part)
    double tolerance = 0.0;
    bool within = false;        ///< smallest-epsilon discrepancy inside max(tol |T Sigma|, 3 SE)
    bool monotone = false;      ///< |discrepancy| non-increasing up to one SE
    bool passed = false;
};

/// Componentwise scale |T Sigma|_ij := T sqrt(Sigma_ii Sigma_jj) (the diagonal for i = j).
Etp2Result check_etp2(const std::vector<PathEnsemble>& ensembles, const EffectiveLaw& law, double tol);

struct Etp1Row {
    double epsilon = 0.0;
    std::vector<stats::MeanSe> counts;  ///< per delta
    std::vector<double> bound;          ///< proof envelope per delta (NaN where its precondition fails)
};

struct Etp1Result {
    std::vector<double> deltas;
    std::vector<Etp1Row> rows;  ///< decreasing epsilon
    double tolerance = 0.0;
    bool vacuous = false;       ///< no jump kernel
    bool decreasing = false;    ///< strictly decreasing in epsilon, or already identically zero
    bool below_tolerance = false;
    bool passed = false;
};

/// Inputs for the proof's envelope
/// (8 sqrt2 Gamma^{1/2} eps t^{1/2} / (gamma^{1/2} delta^2) + 4 t / delta^2) sup_x int_{|y| > delta/(2 eps)} |y|^2 nu,
/// valid once 2 eps ||beta||_inf < delta / 2.
struct Etp1BoundInputs {
    double gamma = 0.0;
    double Gamma = 0.0;
    double beta_sup = 0.0;
    const LevyTripletModel* model = nullptr;
    const TorusGrid* grid = nullptr;
};

double etp1_envelope(const Etp1BoundInputs& in, double epsilon, double delta, double t);

Etp1Result check_etp1(const std::vector<PathEnsemble>& ensembles, double tol,
                      const std::optional<Etp1BoundInputs>& bound = std::nullopt);

struct GaussianityResult {
    double epsilon = 0.0;
    std::size_t n = 0;
    int rank = 0;
    std::vector<stats::KsResult> ks;  ///< one per whitened coordinate
    stats::WaldResult wald;
    double alpha = 0.01;
    bool vacuous = false;
    bool ks_passed = false;
    bool passed = false;
    std::string warning;
};

/// Whitens Y_T by Sigma^{-1/2} T^{-1/2} (pseudo-inverse when singular, no centering).
GaussianityResult check_gaussianity(const PathEnsemble& ensemble, const EffectiveLaw& law, double alpha = 0.01);

struct SigmaEstimate {
    Mat sigma;  ///< covariance of Y_T / sqrt(T)
    Mat se;
    Vec mean;   ///< mean of Y_T / sqrt(T)
    Vec mean_se;
};

SigmaEstimate sigma_mc(const PathEnsemble& ensemble);

struct VerifyConfig {
    std::vector<int> resolution;
    std::vector<double> epsilons{0.2, 0.1, 0.05};
    SimulationConfig sim;  ///< epsilon is overridden per sweep entry
    double etp2_tol = 0.05;
    double etp1_tol = 0.01;
    double alpha = 0.01;
    double ergodicity_horizon = 0.0;
};

struct Verdict {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerificationReport {
    std::string model_name;
    std::uint64_t model_hash = 0;
    VerifyConfig config;
    SolvedModel solved;
    std::optional<ErgodicityEstimate> ergodicity;
    std::string ergodicity_error;
    std::vector<PathEnsemble> ensembles;  ///< decreasing epsilon
    SigmaEstimate sigma_mc;               ///< at the smallest epsilon
    Etp2Result etp2;
    Etp1Result etp1;
    GaussianityResult gaussianity;
    std::vector<Verdict> verdicts;
    bool passed = false;
};

VerificationReport full_report(const LevyTripletModel& model, const VerifyConfig& config);

}  // namespace perhom
