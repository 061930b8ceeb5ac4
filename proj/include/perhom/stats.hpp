#pragma once

#include "perhom/torus.hpp"

#include <span>
#include <vector>

namespace perhom::stats {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;  ///< sample standard deviation / sqrt(n)
};

MeanSe mean_se(std::span<const double> xs);

double normal_cdf(double x) noexcept;

/// P(K > x) for the Kolmogorov distribution, alternating series.
double kolmogorov_sf(double x) noexcept;

struct KsResult {
    double statistic = 0.0;  ///< D_n
    double p_value = 1.0;
};

/// One-sample KS test against N(0, 1). The p-value uses the asymptotic
/// distribution at (sqrt(n) + 0.12 + 0.11/sqrt(n)) D_n (Stephens).
KsResult ks_normal(std::vector<double> xs);

struct WaldResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Tests E[w w^T] = I for rows w of an n x r sample of whitened vectors
/// (mean assumed zero). Under Gaussianity n (S_ii - 1)^2 / 2 and n S_ij^2 are
/// asymptotically independent chi^2_1, giving chi^2 with r(r+1)/2 dof.
WaldResult covariance_wald(const Mat& whitened);

/// Survival function of chi^2_k.
double chi_squared_sf(double x, double dof);

/// Whitening map for a symmetric PSD matrix; eigenvalues below rel_tol * max are treated as zero.
struct PseudoInverseRoot {
    Mat root;  ///< full rank: the symmetric d x d inverse root; otherwise r x d eigen-coordinates scaled by lambda^{-1/2}
    int rank = 0;
};
PseudoInverseRoot pseudo_inverse_root(const Mat& sym, double rel_tol = 1e-10);

}  // namespace perhom::stats
