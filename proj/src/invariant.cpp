#include "perhom/invariant.hpp"

#include "perhom/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace perhom {

namespace {

using ColSparse = Eigen::SparseMatrix<double>;

std::size_t reach_count(const SparseMatrix& adj) {
    const auto n = static_cast<std::size_t>(adj.rows());
    std::vector<char> seen(n, 0);
    std::deque<Eigen::Index> queue{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!queue.empty()) {
        const auto i = queue.front();
        queue.pop_front();
        for (SparseMatrix::InnerIterator it(adj, i); it; ++it) {
            const auto j = it.col();
            if (j == i || it.value() <= 0.0 || seen[static_cast<std::size_t>(j)]) continue;
            seen[static_cast<std::size_t>(j)] = 1;
            ++count;
            queue.push_back(j);
        }
    }
    return count;
}

// Clamp tiny negatives, renormalise, record the residual.
void finalize(const GeneratorMatrix& generator, InvariantMeasure& pi) {
    double clamped = 0.0;
    for (Eigen::Index j = 0; j < pi.weights.size(); ++j) {
        double& w = pi.weights[j];
        if (w < 0.0) {
            if (w < -1e-14) {
                throw Error(ErrorCode::NoConvergence,
                            "invariant weight " + std::to_string(w) + " is negative beyond round-off");
            }
            clamped += -w;
            w = 0.0;
        }
    }
    pi.weights /= pi.weights.sum();
    pi.clamped_mass = clamped;
    const Vec r = generator.matrix.transpose() * pi.weights;
    pi.residual = r.cwiseAbs().maxCoeff();
}

double max_rate(const GeneratorMatrix& generator) {
    return generator.matrix.diagonal().cwiseAbs().maxCoeff();
}

}  // namespace

bool strongly_connected(const GeneratorMatrix& generator) {
    const auto& g = generator.matrix;
    if (g.rows() <= 1) return true;
    if (reach_count(g) != static_cast<std::size_t>(g.rows())) return false;
    SparseMatrix gt = g.transpose();
    return reach_count(gt) == static_cast<std::size_t>(g.rows());
}

double tv_distance(const Vec& p, const Vec& q) {
    if (p.size() != q.size()) throw Error(ErrorCode::DimensionMismatch, "TV distance needs equal lengths");
    return 0.5 * (p - q).cwiseAbs().sum();
}

InvariantMeasure power_iteration(const GeneratorMatrix& generator, const Vec& start, const InvariantOptions& options) {
    const auto n = static_cast<Eigen::Index>(generator.size());
    if (start.size() != n) throw Error(ErrorCode::DimensionMismatch, "start vector length does not match generator");
    if ((start.array() <= 0.0).any()) throw Error(ErrorCode::InvalidArgument, "power iteration needs a positive start");
    const double rate = max_rate(generator);
    InvariantMeasure pi;
    pi.method = "power-iteration";
    pi.weights = start / start.sum();
    if (rate == 0.0) {
        finalize(generator, pi);
        return pi;
    }
    // Lazy chain (diagonal >= 1/2) so the iteration cannot oscillate.
    const double s = 0.5 / rate;
    const SparseMatrix gt = generator.matrix.transpose();
    const double target = options.tolerance * std::max(generator.norm_inf(), 1e-300);
    Vec next(n);
    for (long k = 1; k <= options.max_iterations; ++k) {
        next.noalias() = gt * pi.weights;
        pi.weights += s * next;
        if (k % 64 == 0) {
            pi.weights /= pi.weights.sum();
            next.noalias() = gt * pi.weights;
            if (next.cwiseAbs().maxCoeff() <= target) {
                pi.iterations = k;
                finalize(generator, pi);
                return pi;
            }
        }
    }
    throw Error(ErrorCode::NoConvergence,
                "power iteration did not reach the residual target in " + std::to_string(options.max_iterations) +
                    " steps");
}

InvariantMeasure solve_invariant(const GeneratorMatrix& generator, const InvariantOptions& options) {
    const auto n = static_cast<Eigen::Index>(generator.size());
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty generator");
    if (!strongly_connected(generator)) {
        throw Error(ErrorCode::ReducibleGenerator, "off-diagonal support graph is not strongly connected");
    }
    if (options.force_power_iteration) return power_iteration(generator, Vec::Ones(n), options);

    // [G^T 1; 1^T 0] [pi; mu] = [0; 1]
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(generator.matrix.nonZeros() + 2 * n));
    for (Eigen::Index i = 0; i < generator.matrix.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(generator.matrix, i); it; ++it) {
            trips.emplace_back(static_cast<int>(it.col()), static_cast<int>(it.row()), it.value());
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        trips.emplace_back(static_cast<int>(j), static_cast<int>(n), 1.0);
        trips.emplace_back(static_cast<int>(n), static_cast<int>(j), 1.0);
    }
    ColSparse bordered(n + 1, n + 1);
    bordered.setFromTriplets(trips.begin(), trips.end());
    bordered.makeCompressed();

    Eigen::SparseLU<ColSparse, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(bordered);
    if (lu.info() == Eigen::Success) {
        Vec rhs = Vec::Zero(n + 1);
        rhs[n] = 1.0;
        Vec sol = lu.solve(rhs);
        if (lu.info() == Eigen::Success && sol.allFinite()) {
            for (int pass = 0; pass < 2; ++pass) {
                const Vec r = rhs - bordered * sol;
                sol += lu.solve(r);
            }
            InvariantMeasure pi;
            pi.method = "bordered-lu";
            pi.weights = sol.head(n);
            try {
                finalize(generator, pi);
                if (pi.residual <= std::max(options.tolerance, 1e-10) * generator.norm_inf()) return pi;
            } catch (const Error&) {
                // fall through to the iterative path
            }
        }
    }
    return power_iteration(generator, Vec::Ones(n), options);
}

namespace {

std::optional<double> dense_spectral_gap(const GeneratorMatrix& generator) {
    const Mat g(generator.matrix);
    Eigen::EigenSolver<Mat> es(g, false);
    if (es.info() != Eigen::Success) return std::nullopt;
    const auto& ev = es.eigenvalues();
    Eigen::Index zero = 0;
    for (Eigen::Index i = 1; i < ev.size(); ++i) {
        if (std::abs(ev[i]) < std::abs(ev[zero])) zero = i;
    }
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (i != zero) gap = std::min(gap, -ev[i].real());
    }
    if (!std::isfinite(gap) || gap <= 0.0) return std::nullopt;
    return gap;
}

std::vector<Eigen::Index> start_rows(Eigen::Index n) {
    std::vector<Eigen::Index> rows;
    if (n <= 512) {
        for (Eigen::Index i = 0; i < n; ++i) rows.push_back(i);
    } else {
        for (int k = 0; k < 64; ++k) rows.push_back(n * k / 64);
    }
    return rows;
}

}  // namespace

ErgodicityEstimate estimate_ergodicity(const GeneratorMatrix& generator, const InvariantMeasure& pi, double horizon,
                                       const ErgodicityOptions& options) {
    const auto n = static_cast<Eigen::Index>(generator.size());
    if (pi.weights.size() != n) throw Error(ErrorCode::DimensionMismatch, "invariant measure does not match generator");
    if (options.samples < 2) throw Error(ErrorCode::InvalidArgument, "need at least two time samples");
    ErgodicityEstimate est;
    if (static_cast<std::size_t>(n) <= options.max_dense) est.spectral_gap = dense_spectral_gap(generator);
    if (horizon <= 0.0) horizon = est.spectral_gap ? 20.0 / *est.spectral_gap : 10.0;
    est.horizon = horizon;

    const int k_samples = options.samples;
    const double delta = horizon / k_samples;
    const auto rows = start_rows(n);
    Mat r(static_cast<Eigen::Index>(rows.size()), n);
    r.setZero();
    for (std::size_t a = 0; a < rows.size(); ++a) r(static_cast<Eigen::Index>(a), rows[a]) = 1.0;

    auto sup_tv = [&](const Mat& m) {
        double best = 0.0;
        for (Eigen::Index a = 0; a < m.rows(); ++a) best = std::max(best, 0.5 * (m.row(a).transpose() - pi.weights).cwiseAbs().sum());
        return best;
    };
    est.times.push_back(0.0);
    est.tv.push_back(sup_tv(r));
    if (static_cast<std::size_t>(n) <= options.max_dense) {
        const Mat p = (Mat(generator.matrix) * delta).exp();
        for (int k = 1; k <= k_samples; ++k) {
            Mat next = r * p;
            r = std::move(next);
            est.times.push_back(k * delta);
            est.tv.push_back(sup_tv(r));
        }
    } else {
        // Sub-steps well inside the positivity limit keep the Euler error of the chain small.
        const int m = transition_substeps(generator, 4.0 * delta);
        const double s = delta / std::ldexp(1.0, m);
        const SparseMatrix gt = generator.matrix.transpose();
        Mat rt = r.transpose();
        for (int k = 1; k <= k_samples; ++k) {
            for (long q = 0; q < (1L << m); ++q) {
                Mat inc = gt * rt;
                rt += s * inc;
            }
            est.times.push_back(k * delta);
            est.tv.push_back(sup_tv(rt.transpose()));
        }
    }
    if (est.tv.back() > 0.5) {
        throw Error(ErrorCode::HorizonTooShort,
                    "TV distance " + std::to_string(est.tv.back()) + " has not decayed below 0.5 by the horizon");
    }

    // Log-linear least squares on the informative part of the decay curve.
    auto fit = [&](double upper, bool include_origin) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t k = include_origin ? 0 : 1; k < est.tv.size(); ++k) {
            if (est.tv[k] >= 1e-11 && est.tv[k] <= upper) pts.emplace_back(est.times[k], std::log(est.tv[k]));
        }
        return pts;
    };
    auto pts = fit(0.25, false);
    if (pts.size() < 2) pts = fit(0.5, false);
    if (pts.size() < 2) pts = fit(1.0, true);
    double slope = 0.0;
    if (pts.size() >= 2) {
        double st = 0, sy = 0, stt = 0, sty = 0;
        for (auto [t, y] : pts) {
            st += t;
            sy += y;
            stt += t * t;
            sty += t * y;
        }
        const double np = static_cast<double>(pts.size());
        slope = (np * sty - st * sy) / (np * stt - st * st);
    } else {
        slope = std::log(std::max(est.tv[1], 1e-300)) / est.times[1];
    }
    est.fit_gamma = -slope;
    if (est.spectral_gap) {
        est.gamma = *est.spectral_gap;
        est.method = "spectral-gap";
    } else {
        est.gamma = est.fit_gamma;
        est.method = "tv-decay-fit";
    }
    if (!(est.gamma > 0.0)) throw Error(ErrorCode::NoConvergence, "TV distance does not decay");
    // Smallest prefactor for which Gamma e^{-gamma t} dominates every sample above the round-off floor.
    for (std::size_t k = 0; k < est.tv.size(); ++k) {
        if (est.tv[k] < 1e-11) continue;
        est.Gamma = std::max(est.Gamma, est.tv[k] * std::exp(est.gamma * est.times[k]));
    }
    return est;
}

}  // namespace perhom
