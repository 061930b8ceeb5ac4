#pragma once

#include "perhom/grid.hpp"
#include "perhom/kernel.hpp"
#include "perhom/torus.hpp"
#include "perhom/trig.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace perhom {

/// b: T^d -> R^d, one trig field per component.
class DriftField {
public:
    DriftField() = default;
    explicit DriftField(std::vector<TrigField> components) : components_(std::move(components)) {}

    int dim() const noexcept { return static_cast<int>(components_.size()); }
    const std::vector<TrigField>& components() const noexcept { return components_; }
    void eval(const double* x, const std::vector<double>& periods, double* out) const noexcept;
    bool is_zero() const noexcept;

    bool operator==(const DriftField&) const = default;

private:
    std::vector<TrigField> components_;
};

/// c: T^d -> symmetric d x d matrices. Only the upper triangle is stored,
/// so c(x) is symmetric bit-for-bit.
class DiffusionField {
public:
    DiffusionField() = default;
    /// `upper` lists c_ij for i <= j in row-major order.
    DiffusionField(int dim, std::vector<TrigField> upper);

    int dim() const noexcept { return dim_; }
    const TrigField& entry(int i, int j) const;
    const std::vector<TrigField>& upper() const noexcept { return upper_; }
    /// Writes the full matrix, column-major, into out[d*d].
    void eval(const double* x, const std::vector<double>& periods, double* out) const noexcept;
    bool is_zero() const noexcept;

    bool operator==(const DiffusionField&) const = default;

private:
    int dim_ = 0;
    std::vector<TrigField> upper_;
};

/// A tau-periodic Levy triplet (b, c, nu) without killing.
class LevyTripletModel {
public:
    LevyTripletModel() = default;
    LevyTripletModel(std::string name, TorusGeometry geometry, DriftField drift, DiffusionField diffusion,
                     JumpKernel jumps);

    const std::string& name() const noexcept { return name_; }
    const TorusGeometry& geometry() const noexcept { return geometry_; }
    int dim() const noexcept { return geometry_.dim(); }
    const DriftField& drift() const noexcept { return drift_; }
    const DiffusionField& diffusion() const noexcept { return diffusion_; }
    const JumpKernel& jumps() const noexcept { return jumps_; }

    /// Optional user assertion that nu(x, .) is symmetric; cross-checked by validate().
    std::optional<bool> declared_symmetric() const noexcept { return declared_symmetric_; }
    LevyTripletModel& set_declared_symmetric(std::optional<bool> flag) {
        declared_symmetric_ = flag;
        return *this;
    }
    /// Declared bound for sup_x int |y|^2 nu(x, dy).
    double second_moment_bound() const noexcept { return second_moment_bound_; }
    LevyTripletModel& set_second_moment_bound(double bound) {
        second_moment_bound_ = bound;
        return *this;
    }

    Vec drift_at(const Vec& x) const;
    Mat diffusion_at(const Vec& x) const;
    std::vector<double> jump_weights_at(const Vec& x) const;

    bool operator==(const LevyTripletModel&) const = default;

private:
    std::string name_;
    TorusGeometry geometry_;
    DriftField drift_;
    DiffusionField diffusion_;
    JumpKernel jumps_;
    std::optional<bool> declared_symmetric_;
    double second_moment_bound_ = 1e3;
};

/// b*(x) = b(x) + int_{|y| >= 1} y nu(x, dy).
Vec effective_drift_coefficient(const LevyTripletModel& model, const Vec& x);

/// q(x, xi) = -i<xi, b> + 1/2 <xi, c xi> + int (1 - e^{i<xi,y>} + i<xi,y> 1_{|y|<1}) nu(x, dy).
std::complex<double> eval_symbol(const LevyTripletModel& model, const Vec& x, const Vec& xi);

struct ValidationCheck {
    std::string name;
    bool passed = true;
    double value = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool symmetric = false;          ///< numeric symmetry of nu(x, .) at every grid node
    bool zero_drift = false;         ///< b == 0 at every grid node
    double second_moment_sup = 0.0;  ///< sup over nodes of int |y|^2 nu(x, dy)
    double neglected_second_moment = 0.0;

    bool ok() const noexcept;
    /// True when beta == 0 and the two-term covariance formula applies.
    bool reduced_sigma_applies() const noexcept { return symmetric && zero_drift; }
    const ValidationCheck* find(const std::string& name) const;
};

/// Checks periodicity, PSD diffusion, kernel positivity, stability index,
/// second moments and symmetry on the grid nodes. Never throws on a bad model.
ValidationReport validate(const LevyTripletModel& model, const TorusGrid& grid);

}  // namespace perhom
