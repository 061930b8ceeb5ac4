#pragma once

#include "perhom/generator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace perhom {

/// Discrete stationary law: pi_j is the mass at node j.
struct InvariantMeasure {
    Vec weights;
    std::string method;          ///< "bordered-lu" or "power-iteration"
    double residual = 0.0;       ///< ||pi^T G||_inf
    double clamped_mass = 0.0;   ///< total |negative round-off| removed before renormalising
    long iterations = 0;         ///< power-iteration steps (0 for the direct solve)

    std::size_t size() const noexcept { return static_cast<std::size_t>(weights.size()); }
};

struct InvariantOptions {
    long max_iterations = 1'000'000;
    double tolerance = 1e-12;    ///< relative to ||G||_inf
    bool force_power_iteration = false;
};

/// Strong connectivity of the graph with edges i -> j where G_ij > 0 (i != j).
bool strongly_connected(const GeneratorMatrix& generator);

InvariantMeasure solve_invariant(const GeneratorMatrix& generator, const InvariantOptions& options = {});

/// Power iteration pi <- pi (I + sG) from a positive start vector.
InvariantMeasure power_iteration(const GeneratorMatrix& generator, const Vec& start,
                                 const InvariantOptions& options = {});

/// 1/2 sum_j |p_j - q_j|.
double tv_distance(const Vec& p, const Vec& q);

struct ErgodicityEstimate {
    double gamma = 0.0;
    double Gamma = 0.0;
    std::string method;                 ///< "spectral-gap" or "tv-decay-fit"
    double fit_gamma = 0.0;             ///< slope of the log-linear TV fit
    std::optional<double> spectral_gap; ///< min over non-zero eigenvalues of -Re(lambda), small grids only
    double horizon = 0.0;
    std::vector<double> times;
    std::vector<double> tv;             ///< sup over start nodes of TV(P_t(x, .), pi)
};

struct ErgodicityOptions {
    int samples = 64;
    std::size_t max_dense = 1024;       ///< dense transition powers / eigensolve up to this size
};

/// TV decay of P_t = exp(tG) on a uniform time mesh over [0, horizon].
/// horizon <= 0 picks 20 / gap (or 10 when the gap is unavailable).
ErgodicityEstimate estimate_ergodicity(const GeneratorMatrix& generator, const InvariantMeasure& pi,
                                       double horizon = 0.0, const ErgodicityOptions& options = {});

}  // namespace perhom
