#include "perhom/stats.hpp"

#include "perhom/errors.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace perhom::stats {

MeanSe mean_se(std::span<const double> xs) {
    MeanSe r;
    const auto n = xs.size();
    if (n == 0) return r;
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(n);
    r.mean = m;
    if (n < 2) return r;
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    r.se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    return r;
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_sf(double x) noexcept {
    if (x <= 0.0) return 1.0;
    if (x < 0.2) return 1.0;  // series converges poorly; the true value is 1 - O(1e-20)
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_normal(std::vector<double> xs) {
    KsResult r;
    const auto n = xs.size();
    if (n == 0) return r;
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = normal_cdf(xs[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    r.statistic = d;
    const double sn = std::sqrt(static_cast<double>(n));
    r.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
    return r;
}

double chi_squared_sf(double x, double dof) {
    if (x <= 0.0) return 1.0;
    const boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, x));
}

WaldResult covariance_wald(const Mat& w) {
    WaldResult r;
    const auto n = static_cast<double>(w.rows());
    const auto dim = static_cast<int>(w.cols());
    r.dof = dim * (dim + 1) / 2;
    if (w.rows() == 0 || dim == 0) return r;
    const Mat s = (w.transpose() * w) / n;
    double chi = 0.0;
    for (int i = 0; i < dim; ++i) {
        chi += n * (s(i, i) - 1.0) * (s(i, i) - 1.0) / 2.0;
        for (int j = i + 1; j < dim; ++j) chi += n * s(i, j) * s(i, j);
    }
    r.statistic = chi;
    r.p_value = chi_squared_sf(chi, r.dof);
    return r;
}

PseudoInverseRoot pseudo_inverse_root(const Mat& sym, double rel_tol) {
    if (sym.rows() != sym.cols()) throw Error(ErrorCode::DimensionMismatch, "pseudo-inverse root needs a square matrix");
    PseudoInverseRoot out;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (sym + sym.transpose()));
    const Vec& ev = es.eigenvalues();
    const double top = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = ev.size() - 1; i >= 0; --i) {
        if (top > 0.0 && ev[i] > rel_tol * top) keep.push_back(i);
    }
    out.rank = static_cast<int>(keep.size());
    out.root = Mat(out.rank, sym.cols());
    for (int r = 0; r < out.rank; ++r) {
        const auto i = keep[static_cast<std::size_t>(r)];
        out.root.row(r) = es.eigenvectors().col(i).transpose() / std::sqrt(ev[i]);
    }
    // Full rank: the symmetric root Sigma^{-1/2} = V Lambda^{-1/2} V^T.
    if (out.rank == sym.rows()) {
        Mat v(sym.rows(), out.rank);
        for (int r = 0; r < out.rank; ++r) v.col(r) = es.eigenvectors().col(keep[static_cast<std::size_t>(r)]);
        out.root = v * out.root;
    }
    return out;
}

}  // namespace perhom::stats
