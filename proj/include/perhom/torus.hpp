#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

namespace perhom {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// The torus R^d / (tau_1 Z x ... x tau_d Z).
class TorusGeometry {
public:
    TorusGeometry() = default;
    explicit TorusGeometry(std::vector<double> periods);

    int dim() const noexcept { return static_cast<int>(periods_.size()); }
    double period(int k) const { return periods_[static_cast<std::size_t>(k)]; }
    const std::vector<double>& periods() const noexcept { return periods_; }

    /// Reduce one coordinate into [0, tau_k). A single fused multiply-add,
    /// so wrap(x + tau*k) == wrap(x) whenever x + tau*k is exact.
    double wrap_coord(double x, int k) const noexcept {
        const double t = periods_[static_cast<std::size_t>(k)];
        double r = std::fma(-t, std::floor(x / t), x);
        if (r >= t || r < 0.0) r = (r >= t) ? r - t : r + t;
        if (r >= t) r = 0.0;
        return r;
    }

    void wrap_into(std::span<const double> x, std::span<double> out) const noexcept {
        for (int k = 0; k < dim(); ++k) out[static_cast<std::size_t>(k)] = wrap_coord(x[static_cast<std::size_t>(k)], k);
    }

    Vec wrap(const Vec& x) const;

    double volume() const noexcept;

    bool operator==(const TorusGeometry&) const = default;

private:
    std::vector<double> periods_;
};

}  // namespace perhom
