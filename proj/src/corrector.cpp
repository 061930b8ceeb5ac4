#include "perhom/corrector.hpp"

#include "perhom/errors.hpp"

#include <algorithm>
#include <cmath>

namespace perhom {

namespace {

using ColSparse = Eigen::SparseMatrix<double>;
using Lu = Eigen::SparseLU<ColSparse, Eigen::COLAMDOrdering<int>>;

void check_grid(const TorusGrid& grid, const InvariantMeasure& pi) {
    if (pi.size() != grid.size()) throw Error(ErrorCode::GridMismatch, "invariant measure was solved on another grid");
}

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Mat drift_star_on_grid(const LevyTripletModel& model, const TorusGrid& grid) {
    if (!(grid.geometry() == model.geometry())) throw Error(ErrorCode::GridMismatch, "grid torus differs from model torus");
    const int d = model.dim();
    Mat out(static_cast<Eigen::Index>(grid.size()), d);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        out.row(static_cast<Eigen::Index>(j)) = effective_drift_coefficient(model, grid.node(j)).transpose();
    }
    return out;
}

Vec mean_drift(const LevyTripletModel& model, const InvariantMeasure& pi, const TorusGrid& grid) {
    check_grid(grid, pi);
    return drift_star_on_grid(model, grid).transpose() * pi.weights;
}

struct PoissonSolver::Impl {
    const GeneratorMatrix* generator;
    Vec pi;
    ColSparse bordered;
    Lu lu;
};

PoissonSolver::PoissonSolver(const GeneratorMatrix& generator, const InvariantMeasure& pi)
    : impl_(std::make_unique<Impl>()) {
    const auto n = static_cast<Eigen::Index>(generator.size());
    if (pi.weights.size() != n) throw Error(ErrorCode::DimensionMismatch, "invariant measure does not match generator");
    impl_->generator = &generator;
    impl_->pi = pi.weights;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(generator.matrix.nonZeros() + 2 * n));
    for (Eigen::Index i = 0; i < generator.matrix.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(generator.matrix, i); it; ++it) {
            trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        trips.emplace_back(static_cast<int>(j), static_cast<int>(n), 1.0);
        if (pi.weights[j] != 0.0) trips.emplace_back(static_cast<int>(n), static_cast<int>(j), pi.weights[j]);
    }
    impl_->bordered.resize(n + 1, n + 1);
    impl_->bordered.setFromTriplets(trips.begin(), trips.end());
    impl_->bordered.makeCompressed();
    impl_->lu.compute(impl_->bordered);
    if (impl_->lu.info() != Eigen::Success) {
        throw Error(ErrorCode::SingularSystem, "bordered Poisson system is numerically singular");
    }
}

PoissonSolver::~PoissonSolver() = default;
PoissonSolver::PoissonSolver(PoissonSolver&&) noexcept = default;

PoissonSolution PoissonSolver::solve(const Vec& rhs) const {
    const auto n = static_cast<Eigen::Index>(impl_->pi.size());
    if (rhs.size() != n) throw Error(ErrorCode::DimensionMismatch, "rhs length does not match generator");
    const double scale = inf_norm(rhs);
    PoissonSolution out;
    out.projection = impl_->pi.dot(rhs);
    if (std::abs(out.projection) > 1e-10 * scale) {
        throw Error(ErrorCode::IncompatibleRhs,
                    "pi-mean of rhs is " + std::to_string(out.projection) + " (must vanish)");
    }
    if (scale == 0.0) {
        out.u = Vec::Zero(n);
        return out;
    }
    Vec b(n + 1);
    b.head(n) = rhs;
    b[n] = 0.0;
    Vec sol = impl_->lu.solve(b);
    if (impl_->lu.info() != Eigen::Success || !sol.allFinite()) {
        throw Error(ErrorCode::SingularSystem, "bordered Poisson solve failed");
    }
    for (int pass = 0; pass < 3; ++pass) {
        const Vec r = b - impl_->bordered * sol;
        if (r.cwiseAbs().maxCoeff() <= 1e-15 * scale) break;
        sol += impl_->lu.solve(r);
    }
    out.u = sol.head(n);
    out.residual = inf_norm(impl_->generator->matrix * out.u - rhs);
    return out;
}

PoissonSolution solve_poisson(const GeneratorMatrix& generator, const Vec& rhs, const InvariantMeasure& pi) {
    return PoissonSolver(generator, pi).solve(rhs);
}

Mat central_gradient(const TorusGrid& grid, const Mat& values) {
    const int d = grid.dim();
    const auto comps = static_cast<int>(values.cols());
    Mat out(values.rows(), comps * d);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        for (int k = 0; k < d; ++k) {
            const auto up = static_cast<Eigen::Index>(grid.neighbor(j, k, +1));
            const auto dn = static_cast<Eigen::Index>(grid.neighbor(j, k, -1));
            const double inv = 1.0 / (2.0 * grid.spacing(k));
            for (int i = 0; i < comps; ++i) out(jj, i * d + k) = (values(up, i) - values(dn, i)) * inv;
        }
    }
    return out;
}

CorrectorField solve_corrector(const LevyTripletModel& model, const GeneratorMatrix& generator,
                               const InvariantMeasure& pi, const TorusGrid& grid) {
    check_grid(grid, pi);
    if (generator.size() != grid.size()) throw Error(ErrorCode::GridMismatch, "generator was assembled on another grid");
    const int d = model.dim();
    const auto n = static_cast<Eigen::Index>(grid.size());
    const Mat bstar = drift_star_on_grid(model, grid);
    CorrectorField corr;
    corr.mean_drift = bstar.transpose() * pi.weights;
    corr.beta = Mat::Zero(n, d);
    Mat rhs = bstar.rowwise() - corr.mean_drift.transpose();
    // A constant b* leaves only round-off from the pi-average; treat that as zero.
    const double floor = 1e-14 * std::max(1.0, bstar.cwiseAbs().maxCoeff());
    corr.identically_zero = rhs.cwiseAbs().maxCoeff() <= floor;
    if (!corr.identically_zero) {
        const PoissonSolver solver(generator, pi);
        for (int i = 0; i < d; ++i) {
            const PoissonSolution s = solver.solve(rhs.col(i));
            corr.beta.col(i) = s.u;
            corr.residual_norm = std::max(corr.residual_norm, s.residual);
            corr.projection = std::max(corr.projection, std::abs(s.projection));
        }
    }
    corr.grad = central_gradient(grid, corr.beta);
    return corr;
}

namespace {

ColSparse shifted(const GeneratorMatrix& generator, double lambda) {
    ColSparse a = -ColSparse(generator.matrix);
    for (Eigen::Index i = 0; i < a.rows(); ++i) a.coeffRef(i, i) += lambda;
    a.makeCompressed();
    return a;
}

}  // namespace

Vec resolvent_sequence(const GeneratorMatrix& generator, const Vec& rhs, const InvariantMeasure& pi, double lambda) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "resolvent rate must be > 0");
    if (rhs.size() != static_cast<Eigen::Index>(generator.size()) || pi.weights.size() != rhs.size()) {
        throw Error(ErrorCode::DimensionMismatch, "rhs length does not match generator");
    }
    Lu lu;
    const ColSparse a = shifted(generator, lambda);
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "lambda I - G is singular");
    Vec u = lu.solve(rhs);
    const Vec r = rhs - a * u;
    u += lu.solve(r);
    return u;
}

std::vector<ResolventStep> resolvent_sweep(const GeneratorMatrix& generator, const Vec& rhs,
                                           const InvariantMeasure& pi, const Vec& u, int k_max) {
    std::vector<ResolventStep> steps;
    for (int k = 0; k <= k_max; ++k) {
        const double lambda = std::ldexp(1.0, -k);
        const Vec ul = resolvent_sequence(generator, rhs, pi, lambda);
        const Vec centered = ul.array() - pi.weights.dot(ul);
        steps.push_back({lambda, inf_norm(-centered - u)});
    }
    return steps;
}

Vec zero_resolvent(const GeneratorMatrix& generator, const Vec& rhs, const InvariantMeasure& pi, double lambda,
                   int max_iterations, double tolerance) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "resolvent rate must be > 0");
    const auto n = static_cast<Eigen::Index>(generator.size());
    if (rhs.size() != n || pi.weights.size() != n) throw Error(ErrorCode::DimensionMismatch, "rhs length does not match generator");
    Lu lu;
    const ColSparse a = shifted(generator, lambda);
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "lambda I - G is singular");
    Vec v = Vec::Zero(n);
    const double scale = std::max(inf_norm(rhs), 1e-300);
    for (int k = 0; k < max_iterations; ++k) {
        const Vec b = rhs + lambda * v;
        Vec next = lu.solve(b);
        next += lu.solve(Vec(b - a * next));
        next.array() -= pi.weights.dot(next);
        const double change = inf_norm(next - v);
        v = std::move(next);
        if (change <= tolerance * scale * std::max(1.0, inf_norm(v) / scale)) break;
    }
    return -v;
}

}  // namespace perhom
