#include "perhom/effective.hpp"

#include "perhom/errors.hpp"
#include "perhom/generator.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace perhom {

void corrector_jump_difference(const TorusGrid& grid, const CorrectorField& corr, std::size_t node,
                               const double* y, bool folded, double* out) {
    const int d = grid.dim();
    const auto jj = static_cast<Eigen::Index>(node);
    if (folded) {
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += corr.grad_at(node, i, k) * y[k];
            out[i] = s;
        }
        return;
    }
    std::array<double, TorusGrid::kMaxDim> target{};
    const Vec x = grid.node(node);
    for (int k = 0; k < d; ++k) target[static_cast<std::size_t>(k)] = x[k] + y[k];
    for (int i = 0; i < d; ++i) {
        const auto col = corr.beta.col(i);
        out[i] = grid.interpolate(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())),
                                  target.data()) -
                 corr.beta(jj, i);
    }
}

EffectiveLaw assemble_sigma(const LevyTripletModel& model, const TorusGrid& grid, const InvariantMeasure& pi,
                            const CorrectorField& corr, const SigmaOptions& options) {
    if (!(grid.geometry() == model.geometry())) throw Error(ErrorCode::GridMismatch, "grid torus differs from model torus");
    if (pi.size() != grid.size() || static_cast<std::size_t>(corr.beta.rows()) != grid.size()) {
        throw Error(ErrorCode::GridMismatch, "invariant measure or corrector solved on another grid");
    }
    if (corr.residual_norm > options.max_corrector_residual) {
        throw Error(ErrorCode::CorrectorResidualTooLarge,
                    "corrector residual " + std::to_string(corr.residual_norm) + " exceeds " +
                        std::to_string(options.max_corrector_residual));
    }
    const int d = model.dim();
    const auto& geom = model.geometry();
    const auto& jumps = model.jumps();
    const std::size_t nm = jumps.node_count();
    const Mat& ys = jumps.nodes();
    const auto norms = jumps.node_norms();
    const double fold = jumps.is_density() ? folding_radius(grid) : 0.0;

    EffectiveLaw law;
    law.mean_drift = corr.mean_drift;
    law.corrector_residual = corr.residual_norm;
    law.resolution = grid.resolution();
    law.reduced_path_used =
        options.allow_reduced && (corr.identically_zero || validate(model, grid).reduced_sigma_applies());
    law.t1 = Mat::Zero(d, d);
    law.t2 = Mat::Zero(d, d);
    law.t3 = Mat::Zero(d, d);
    law.t4 = Mat::Zero(d, d);

    Vec x(d), dbeta(d);
    Mat c(d, d), a(d, d);
    std::vector<double> w(nm);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double p = pi.weights[static_cast<Eigen::Index>(j)];
        if (p == 0.0) continue;
        grid.node(j, std::span<double>(x.data(), static_cast<std::size_t>(d)));
        model.diffusion().eval(x.data(), geom.periods(), c.data());
        a.setIdentity();
        if (!law.reduced_path_used) {
            for (int i = 0; i < d; ++i) {
                for (int k = 0; k < d; ++k) a(i, k) -= corr.grad_at(j, i, k);
            }
        }
        law.t1.noalias() += p * (a * c * a.transpose());
        if (nm == 0) continue;
        jumps.weights_at(x.data(), geom, w);
        for (std::size_t m = 0; m < nm; ++m) {
            if (w[m] == 0.0) continue;
            const auto y = ys.col(static_cast<Eigen::Index>(m));
            law.t2.noalias() += (p * w[m]) * y * y.transpose();
            if (law.reduced_path_used) continue;
            corrector_jump_difference(grid, corr, j, y.data(), norms[m] < fold, dbeta.data());
            law.t3.noalias() += (p * w[m]) * dbeta * dbeta.transpose();
            law.t4.noalias() += (p * w[m]) * y * dbeta.transpose();
        }
    }
    law.sigma = law.t1 + law.t2 + law.t3 - 2.0 * law.t4;

    const double scale = law.sigma.cwiseAbs().maxCoeff();
    law.symmetry_defect = scale > 0.0 ? (law.sigma - law.sigma.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(law.sigma_symmetric(), Eigen::EigenvaluesOnly);
    law.min_eigenvalue = es.eigenvalues().minCoeff();
    law.positive_semidefinite = law.min_eigenvalue >= -1e-10 * std::abs(law.sigma.trace());
    return law;
}

TestFunction::TestFunction(TrigField field, std::vector<double> periods)
    : field_(std::move(field)), periods_(std::move(periods)) {
    for (const auto& t : field_.terms()) {
        if (t.wave.size() != periods_.size()) throw Error(ErrorCode::DimensionMismatch, "test function wave vector has wrong dimension");
    }
}

double TestFunction::value(const double* x) const { return field_.eval(x, periods_); }

void TestFunction::gradient(const double* x, double* out) const {
    const int d = dim();
    std::fill(out, out + d, 0.0);
    for (const auto& t : field_.terms()) {
        double phase = 0.0;
        for (int k = 0; k < d; ++k) phase += t.wave[static_cast<std::size_t>(k)] * x[k] / periods_[static_cast<std::size_t>(k)];
        phase *= 2.0 * std::numbers::pi;
        const double dphase = -t.cos_amp * std::sin(phase) + t.sin_amp * std::cos(phase);
        for (int k = 0; k < d; ++k) {
            out[k] += 2.0 * std::numbers::pi * t.wave[static_cast<std::size_t>(k)] / periods_[static_cast<std::size_t>(k)] * dphase;
        }
    }
}

void TestFunction::hessian(const double* x, double* out) const {
    const int d = dim();
    std::fill(out, out + d * d, 0.0);
    for (const auto& t : field_.terms()) {
        double phase = 0.0;
        for (int k = 0; k < d; ++k) phase += t.wave[static_cast<std::size_t>(k)] * x[k] / periods_[static_cast<std::size_t>(k)];
        phase *= 2.0 * std::numbers::pi;
        const double v = t.cos_amp * std::cos(phase) + t.sin_amp * std::sin(phase);
        for (int k = 0; k < d; ++k) {
            const double wk = 2.0 * std::numbers::pi * t.wave[static_cast<std::size_t>(k)] / periods_[static_cast<std::size_t>(k)];
            for (int l = 0; l < d; ++l) {
                const double wl = 2.0 * std::numbers::pi * t.wave[static_cast<std::size_t>(l)] / periods_[static_cast<std::size_t>(l)];
                out[k + d * l] -= wk * wl * v;
            }
        }
    }
}

Mat default_slow_points(const TorusGeometry& geometry, int per_axis) {
    const int d = geometry.dim();
    if (per_axis < 1) throw Error(ErrorCode::InvalidArgument, "need at least one slow point per axis");
    long total = 1;
    for (int k = 0; k < d; ++k) total *= per_axis;
    Mat pts(d, total);
    for (long q = 0; q < total; ++q) {
        long r = q;
        for (int k = d - 1; k >= 0; --k) {
            pts(k, q) = geometry.period(k) * static_cast<double>(r % per_axis) / per_axis;
            r /= per_axis;
        }
    }
    return pts;
}

ScaledCheckResult scaled_generator_check(const LevyTripletModel& model, const TorusGrid& grid,
                                         const InvariantMeasure& pi, const CorrectorField& corr,
                                         const EffectiveLaw& law, const TestFunction& f, const Mat& slow_points,
                                         double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1]");
    const int d = model.dim();
    if (f.dim() != d || slow_points.rows() != d) throw Error(ErrorCode::DimensionMismatch, "test function or points have wrong dimension");
    if (pi.size() != grid.size() || static_cast<std::size_t>(corr.beta.rows()) != grid.size()) {
        throw Error(ErrorCode::GridMismatch, "invariant measure or corrector solved on another grid");
    }
    ScaledCheckResult res;
    res.epsilon = epsilon;
    for (int k = 0; k < d; ++k) {
        const double m = model.geometry().period(k) / epsilon;
        if (std::abs(m - std::round(m)) > 1e-9 * m) res.commensurate = false;
    }
    const Mat sig = law.sigma_symmetric();
    const Vec& bbar = law.mean_drift;
    Vec shift(d), xs(d), grad(d), z(d);
    Mat hess(d, d);
    std::vector<double> bvals(static_cast<std::size_t>(d));

    auto slow = [&](const double* p, double* out) {
        for (int k = 0; k < d; ++k) out[k] = epsilon * (shift[k] + p[k]);
    };
    // z -> f(eps z) - eps beta(z) . Df(eps z), z relative to the snapped cell.
    auto fe = [&](const double* p) {
        std::array<double, TorusGrid::kMaxDim> xe{};
        std::array<double, TorusGrid::kMaxDim> g{};
        slow(p, xe.data());
        double v = f.value(xe.data());
        if (!corr.identically_zero) {
            f.gradient(xe.data(), g.data());
            for (int i = 0; i < d; ++i) {
                const auto col = corr.beta.col(i);
                v -= epsilon * g[static_cast<std::size_t>(i)] *
                     grid.interpolate(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), p);
            }
        }
        return v;
    };

    for (Eigen::Index q = 0; q < slow_points.cols(); ++q) {
        for (int k = 0; k < d; ++k) {
            const double tau = model.geometry().period(k);
            shift[k] = tau * std::round(slow_points(k, q) / (epsilon * tau));
        }
        double acc = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double p = pi.weights[static_cast<Eigen::Index>(j)];
            if (p == 0.0) continue;
            grid.node(j, std::span<double>(z.data(), static_cast<std::size_t>(d)));
            slow(z.data(), xs.data());
            const double lhs = apply_local(model, grid, j, fe) / (epsilon * epsilon);
            f.gradient(xs.data(), grad.data());
            f.hessian(xs.data(), hess.data());
            const double rhs = bbar.dot(grad) / epsilon + 0.5 * (sig.cwiseProduct(hess)).sum();
            acc += p * (lhs - rhs);
        }
        res.discrepancy = std::max(res.discrepancy, std::abs(acc));
    }
    return res;
}

}  // namespace perhom
