#pragma once

#include "perhom/torus.hpp"
#include "perhom/trig.hpp"

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace perhom {

enum class KernelFamily { None, Atoms, Convolution, StableLike };

const char* to_string(KernelFamily family) noexcept;

/// Point mass: jumps by `displacement` at rate `rate(x)`.
struct Atom {
    TrigField rate;
    std::vector<double> displacement;

    bool operator==(const Atom&) const = default;
};

/// Radial x angular product rule for density kernels. Radial nodes are
/// log-spaced on [r_min, r_cut] (trapezoid in log r); d = 1 uses the two
/// directions +-1, d = 2 uses `angular_nodes` equally spaced angles.
struct RadialQuadrature {
    double r_min = 1e-3;
    double r_cut = 1.0;
    int radial_nodes = 64;
    int angular_nodes = 16;

    bool operator==(const RadialQuadrature&) const = default;
};

/// nu(x, dy) = lambda(x) mu(x + y) a(y) dy with a(y) = amplitude exp(-|y|^2 / (2 scale^2)),
/// supported on r_min <= |y| <= r_cut.
struct ConvolutionSpec {
    TrigField lambda{1.0};
    TrigField mu{1.0};
    double amplitude = 1.0;
    double scale = 0.25;
    RadialQuadrature quadrature;

    bool operator==(const ConvolutionSpec&) const = default;
};

/// nu(x, dy) = kappa(x) (1 + skew * y_1/|y|) |y|^{-d-alpha(x)} dy on r_min <= |y| <= r_cut.
struct StableLikeSpec {
    TrigField alpha{1.0};
    TrigField kappa{1.0};
    double skew = 0.0;
    RadialQuadrature quadrature;

    bool operator==(const StableLikeSpec&) const = default;
};

/// Jump kernel nu(x, dy) discretised as a fixed set of displacement nodes
/// y_m with state-dependent non-negative weights w_m(x), so that
/// int g(y) nu(x, dy) ~ sum_m w_m(x) g(y_m).
class JumpKernel {
public:
    using Spec = std::variant<std::monostate, std::vector<Atom>, ConvolutionSpec, StableLikeSpec>;

    JumpKernel() = default;
    static JumpKernel none(int dim);
    static JumpKernel atoms(int dim, std::vector<Atom> atoms);
    static JumpKernel convolution(int dim, ConvolutionSpec spec);
    static JumpKernel stable_like(int dim, StableLikeSpec spec);

    KernelFamily family() const noexcept;
    int dim() const noexcept { return dim_; }
    const Spec& spec() const noexcept { return spec_; }
    bool is_density() const noexcept;

    std::size_t node_count() const noexcept { return norms_.size(); }
    /// d x M matrix, one displacement per column.
    const Mat& nodes() const noexcept { return nodes_; }
    std::span<const double> node_norms() const noexcept { return norms_; }

    /// Node weights at a wrapped point x.
    void weights_at(const double* x, const TorusGeometry& geometry, std::span<double> out) const;
    std::vector<double> weights_at(const Vec& x, const TorusGeometry& geometry) const;

    /// Analytic sup_x w_m(x) per node; the dominating kernel used for thinning.
    const std::vector<double>& weight_bounds() const noexcept { return bounds_; }

    /// Bound on sup_x int_{|y| < r_min} |y|^2 nu(x, dy), the part not represented
    /// by the nodes (zero for atoms).
    double neglected_second_moment() const noexcept { return neglected_m2_; }

    bool operator==(const JumpKernel& other) const { return dim_ == other.dim_ && spec_ == other.spec_; }

private:
    void build_density_nodes(const RadialQuadrature& q);
    void finalize_bounds();

    int dim_ = 1;
    Spec spec_;
    Mat nodes_;
    std::vector<double> norms_;
    std::vector<double> base_weights_;  // quadrature weight x profile part independent of x
    std::vector<double> log_norms_;
    std::vector<double> bounds_;
    double neglected_m2_ = 0.0;
};

}  // namespace perhom
