#pragma once

#include "perhom/generator.hpp"
#include "perhom/invariant.hpp"
#include "perhom/model.hpp"

#include <Eigen/SparseLU>

#include <memory>
#include <vector>

namespace perhom {

/// b_bar* = sum_j pi_j b*(x_j).
Vec mean_drift(const LevyTripletModel& model, const InvariantMeasure& pi, const TorusGrid& grid);

/// b*(x_j) for every node, N x d.
Mat drift_star_on_grid(const LevyTripletModel& model, const TorusGrid& grid);

struct PoissonSolution {
    Vec u;
    double residual = 0.0;    ///< ||G u - rhs||_inf
    double projection = 0.0;  ///< <pi, rhs>, removed by the solve
};

/// Factorises the bordered system [G 1; pi^T 0] once for repeated right-hand sides.
/// The border column absorbs the pi-mean of rhs, so G u = rhs - <pi, rhs> and <pi, u> = 0.
class PoissonSolver {
public:
    PoissonSolver(const GeneratorMatrix& generator, const InvariantMeasure& pi);
    ~PoissonSolver();
    PoissonSolver(PoissonSolver&&) noexcept;

    /// Throws IncompatibleRhs if |<pi, rhs>| > 1e-10 ||rhs||_inf.
    PoissonSolution solve(const Vec& rhs) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

PoissonSolution solve_poisson(const GeneratorMatrix& generator, const Vec& rhs, const InvariantMeasure& pi);

struct CorrectorField {
    Mat beta;                  ///< N x d
    Mat grad;                  ///< N x d^2, column i*d + k holds d_k beta_i
    Vec mean_drift;            ///< b_bar*
    double residual_norm = 0.0;
    double projection = 0.0;   ///< max_i |<pi, rhs_i>|
    bool identically_zero = false;

    int dim() const noexcept { return static_cast<int>(beta.cols()); }
    double grad_at(std::size_t node, int i, int k) const {
        return grad(static_cast<Eigen::Index>(node), i * dim() + k);
    }
};

/// beta_i solves G beta_i = b*_i - b_bar*_i with <pi, beta_i> = 0.
CorrectorField solve_corrector(const LevyTripletModel& model, const GeneratorMatrix& generator,
                               const InvariantMeasure& pi, const TorusGrid& grid);

/// Periodic second-order central differences, N x d^2 (column i*d + k is d_k of column i).
Mat central_gradient(const TorusGrid& grid, const Mat& values);

/// u_lambda = (lambda I - G)^{-1} rhs. Note u_lambda -> -u as lambda -> 0,
/// where G u = rhs (the resolvent integrates the semigroup, the Poisson solve inverts G).
Vec resolvent_sequence(const GeneratorMatrix& generator, const Vec& rhs, const InvariantMeasure& pi, double lambda);

struct ResolventStep {
    double lambda = 0.0;
    double error = 0.0;  ///< ||-(u_lambda - <pi, u_lambda>) - u||_inf
};

/// Errors along lambda_k = 2^{-k}, k = 0..k_max, against a direct solution u.
std::vector<ResolventStep> resolvent_sweep(const GeneratorMatrix& generator, const Vec& rhs,
                                           const InvariantMeasure& pi, const Vec& u, int k_max);

/// Centered solution of G u = rhs from the resolvent identity:
/// v <- R_lambda(rhs + lambda v) converges to -u + const for any fixed lambda > 0.
Vec zero_resolvent(const GeneratorMatrix& generator, const Vec& rhs, const InvariantMeasure& pi, double lambda,
                   int max_iterations = 200, double tolerance = 1e-14);

}  // namespace perhom
