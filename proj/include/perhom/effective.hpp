#pragma once

#include "perhom/corrector.hpp"
#include "perhom/invariant.hpp"
#include "perhom/model.hpp"

#include <string>
#include <vector>

namespace perhom {

/// Homogenized law: Sigma = T1 + T2 + T3 - 2 T4.
struct EffectiveLaw {
    Vec mean_drift;
    Mat sigma;
    Mat t1;  ///< int (I - D beta) c (I - D beta)^T dpi
    Mat t2;  ///< int int y y^T nu dpi
    Mat t3;  ///< int int (beta(x+y) - beta(x)) (beta(x+y) - beta(x))^T nu dpi
    Mat t4;  ///< int int y (beta(x+y) - beta(x))^T nu dpi
    bool reduced_path_used = false;
    double symmetry_defect = 0.0;  ///< max|Sigma - Sigma^T| / max|Sigma|
    double min_eigenvalue = 0.0;   ///< of the symmetric part
    bool positive_semidefinite = true;
    double corrector_residual = 0.0;
    std::vector<int> resolution;

    int dim() const noexcept { return static_cast<int>(sigma.rows()); }
    /// (Sigma + Sigma^T) / 2; the covariance used by the simulation checks.
    Mat sigma_symmetric() const { return 0.5 * (sigma + sigma.transpose()); }
};

struct SigmaOptions {
    bool allow_reduced = true;
    double max_corrector_residual = 1e-6;
};

/// beta(x+y) - beta(x) for jump node m at grid node j: multilinear interpolation
/// of the grid corrector, or the gradient (Taylor) form for folded small jumps.
void corrector_jump_difference(const TorusGrid& grid, const CorrectorField& corr, std::size_t node,
                               const double* y, bool folded, double* out);

EffectiveLaw assemble_sigma(const LevyTripletModel& model, const TorusGrid& grid, const InvariantMeasure& pi,
                            const CorrectorField& corr, const SigmaOptions& options = {});

/// Trigonometric test function on the torus with analytic derivatives.
class TestFunction {
public:
    TestFunction(TrigField field, std::vector<double> periods);

    double value(const double* x) const;
    void gradient(const double* x, double* out) const;
    /// Column-major d x d.
    void hessian(const double* x, double* out) const;
    int dim() const noexcept { return static_cast<int>(periods_.size()); }

private:
    TrigField field_;
    std::vector<double> periods_;
};

struct ScaledCheckResult {
    double epsilon = 0.0;
    double discrepancy = 0.0;
    bool commensurate = true;  ///< tau_k / epsilon integral on every axis
};

/// `per_axis`^d equally spaced points of one period, d x P.
Mat default_slow_points(const TorusGeometry& geometry, int per_axis = 16);

/// sup over slow points x0 of |sum_j pi_j (L_eps f_eps - eps^{-1} <b_bar*, Df> - 1/2 Tr Sigma D^2 f)(x0 + eps z_j)|
/// with f_eps = f - eps beta(x/eps) . Df. Slow points are snapped so that x0/eps lies on the period
/// lattice; L_eps applies the discrete generator row at z_j to the non-periodic function z -> f_eps(eps z),
/// scaled by eps^{-2}. The pi-average over the fast cell removes the O(1) oscillation that a pointwise
/// sup would retain.
ScaledCheckResult scaled_generator_check(const LevyTripletModel& model, const TorusGrid& grid,
                                         const InvariantMeasure& pi, const CorrectorField& corr,
                                         const EffectiveLaw& law, const TestFunction& f, const Mat& slow_points,
                                         double epsilon);

}  // namespace perhom
