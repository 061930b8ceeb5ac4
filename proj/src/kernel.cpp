#include "perhom/kernel.hpp"

#include "perhom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace perhom {

const char* to_string(KernelFamily family) noexcept {
    switch (family) {
        case KernelFamily::None: return "none";
        case KernelFamily::Atoms: return "atoms";
        case KernelFamily::Convolution: return "convolution";
        case KernelFamily::StableLike: return "stable_like";
    }
    return "unknown";
}

namespace {

double unit_sphere_area(int d) {
    return d == 1 ? 2.0 : 2.0 * std::numbers::pi;
}

void check_quadrature(const RadialQuadrature& q, int dim) {
    if (dim > 2) throw Error(ErrorCode::QuadratureUnavailable, "density kernels are supported in d = 1, 2 only");
    if (!(q.r_min > 0.0) || !(q.r_cut > q.r_min)) {
        throw Error(ErrorCode::ModelInvalid, "density kernel needs 0 < r_min < r_cut");
    }
    if (q.radial_nodes < 2) throw Error(ErrorCode::ModelInvalid, "radial_nodes must be >= 2");
    if (dim == 2 && q.angular_nodes < 4) throw Error(ErrorCode::ModelInvalid, "angular_nodes must be >= 4");
}

}  // namespace

JumpKernel JumpKernel::none(int dim) {
    JumpKernel k;
    k.dim_ = dim;
    k.nodes_ = Mat(dim, 0);
    return k;
}

JumpKernel JumpKernel::atoms(int dim, std::vector<Atom> atoms) {
    JumpKernel k;
    k.dim_ = dim;
    k.nodes_ = Mat(dim, static_cast<Eigen::Index>(atoms.size()));
    for (std::size_t m = 0; m < atoms.size(); ++m) {
        if (static_cast<int>(atoms[m].displacement.size()) != dim) {
            throw Error(ErrorCode::DimensionMismatch, "atom displacement dimension does not match the model");
        }
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double y = atoms[m].displacement[static_cast<std::size_t>(i)];
            k.nodes_(i, static_cast<Eigen::Index>(m)) = y;
            r2 += y * y;
        }
        k.norms_.push_back(std::sqrt(r2));
        k.base_weights_.push_back(1.0);
    }
    k.spec_ = std::move(atoms);
    k.finalize_bounds();
    return k;
}

JumpKernel JumpKernel::convolution(int dim, ConvolutionSpec spec) {
    check_quadrature(spec.quadrature, dim);
    if (!(spec.scale > 0.0)) throw Error(ErrorCode::ModelInvalid, "convolution profile scale must be > 0");
    JumpKernel k;
    k.dim_ = dim;
    k.build_density_nodes(spec.quadrature);
    for (std::size_t m = 0; m < k.norms_.size(); ++m) {
        const double r = k.norms_[m];
        k.base_weights_[m] *= spec.amplitude * std::exp(-r * r / (2.0 * spec.scale * spec.scale));
    }
    const double rm = spec.quadrature.r_min;
    k.neglected_m2_ = std::max(0.0, spec.lambda.upper_bound()) * std::max(0.0, spec.mu.upper_bound()) *
                      std::max(0.0, spec.amplitude) * unit_sphere_area(dim) * std::pow(rm, dim + 2) / (dim + 2);
    k.spec_ = std::move(spec);
    k.finalize_bounds();
    return k;
}

JumpKernel JumpKernel::stable_like(int dim, StableLikeSpec spec) {
    check_quadrature(spec.quadrature, dim);
    JumpKernel k;
    k.dim_ = dim;
    k.build_density_nodes(spec.quadrature);
    for (std::size_t m = 0; m < k.norms_.size(); ++m) {
        const double u1 = k.nodes_(0, static_cast<Eigen::Index>(m)) / k.norms_[m];
        k.base_weights_[m] *= 1.0 + spec.skew * u1;
    }
    const double a_hi = spec.alpha.upper_bound();
    if (a_hi < 2.0) {
        const double rm = spec.quadrature.r_min;
        k.neglected_m2_ = std::max(0.0, spec.kappa.upper_bound()) * unit_sphere_area(dim) *
                          std::pow(rm, 2.0 - a_hi) / (2.0 - a_hi);
    } else {
        k.neglected_m2_ = std::numeric_limits<double>::infinity();
    }
    k.spec_ = std::move(spec);
    k.finalize_bounds();
    return k;
}

void JumpKernel::build_density_nodes(const RadialQuadrature& q) {
    const int nr = q.radial_nodes;
    const int na = dim_ == 1 ? 2 : q.angular_nodes;
    const double lo = std::log(q.r_min);
    const double step = (std::log(q.r_cut) - lo) / (nr - 1);
    const double angular_weight = dim_ == 1 ? 1.0 : 2.0 * std::numbers::pi / na;
    nodes_ = Mat(dim_, static_cast<Eigen::Index>(nr) * na);
    Eigen::Index col = 0;
    for (int k = 0; k < nr; ++k) {
        const double lr = lo + step * k;
        const double r = std::exp(lr);
        const double trap = (k == 0 || k == nr - 1) ? 0.5 : 1.0;
        // dr = r d(log r); volume element r^{d-1} dr dtheta.
        const double radial_weight = trap * step * r * std::pow(r, dim_ - 1);
        for (int a = 0; a < na; ++a) {
            if (dim_ == 1) {
                nodes_(0, col) = a == 0 ? r : -r;
            } else {
                const double theta = 2.0 * std::numbers::pi * a / na;
                nodes_(0, col) = r * std::cos(theta);
                nodes_(1, col) = r * std::sin(theta);
            }
            norms_.push_back(r);
            log_norms_.push_back(lr);
            base_weights_.push_back(radial_weight * angular_weight);
            ++col;
        }
    }
}

KernelFamily JumpKernel::family() const noexcept {
    switch (spec_.index()) {
        case 1: return KernelFamily::Atoms;
        case 2: return KernelFamily::Convolution;
        case 3: return KernelFamily::StableLike;
        default: return KernelFamily::None;
    }
}

bool JumpKernel::is_density() const noexcept {
    return family() == KernelFamily::Convolution || family() == KernelFamily::StableLike;
}

void JumpKernel::weights_at(const double* x, const TorusGeometry& geometry, std::span<double> out) const {
    const auto& periods = geometry.periods();
    if (const auto* atoms = std::get_if<std::vector<Atom>>(&spec_)) {
        for (std::size_t m = 0; m < atoms->size(); ++m) out[m] = (*atoms)[m].rate.eval(x, periods);
    } else if (const auto* conv = std::get_if<ConvolutionSpec>(&spec_)) {
        const double lam = conv->lambda.eval(x, periods);
        double target[2];
        for (std::size_t m = 0; m < norms_.size(); ++m) {
            for (int i = 0; i < dim_; ++i) {
                target[i] = geometry.wrap_coord(x[i] + nodes_(i, static_cast<Eigen::Index>(m)), i);
            }
            out[m] = lam * conv->mu.eval(target, periods) * base_weights_[m];
        }
    } else if (const auto* st = std::get_if<StableLikeSpec>(&spec_)) {
        const double kap = st->kappa.eval(x, periods);
        const double expo = -(dim_ + st->alpha.eval(x, periods));
        const std::size_t per_radius = dim_ == 1 ? 2 : static_cast<std::size_t>(st->quadrature.angular_nodes);
        for (std::size_t m = 0; m < norms_.size(); m += per_radius) {
            const double radial = kap * std::exp(expo * log_norms_[m]);
            for (std::size_t a = 0; a < per_radius; ++a) out[m + a] = radial * base_weights_[m + a];
        }
    }
}

std::vector<double> JumpKernel::weights_at(const Vec& x, const TorusGeometry& geometry) const {
    const Vec w = geometry.wrap(x);
    std::vector<double> out(node_count());
    weights_at(w.data(), geometry, out);
    return out;
}

void JumpKernel::finalize_bounds() {
    bounds_.assign(norms_.size(), 0.0);
    if (const auto* atoms = std::get_if<std::vector<Atom>>(&spec_)) {
        for (std::size_t m = 0; m < atoms->size(); ++m) bounds_[m] = std::max(0.0, (*atoms)[m].rate.upper_bound());
    } else if (const auto* conv = std::get_if<ConvolutionSpec>(&spec_)) {
        const double top = std::max(0.0, conv->lambda.upper_bound()) * std::max(0.0, conv->mu.upper_bound());
        for (std::size_t m = 0; m < norms_.size(); ++m) bounds_[m] = top * std::max(0.0, base_weights_[m]);
    } else if (const auto* st = std::get_if<StableLikeSpec>(&spec_)) {
        const double kap = std::max(0.0, st->kappa.upper_bound());
        const double a_lo = st->alpha.lower_bound();
        const double a_hi = st->alpha.upper_bound();
        for (std::size_t m = 0; m < norms_.size(); ++m) {
            const double lr = log_norms_[m];
            const double radial = std::max(std::exp(-(dim_ + a_lo) * lr), std::exp(-(dim_ + a_hi) * lr));
            bounds_[m] = kap * radial * std::max(0.0, base_weights_[m]);
        }
    }
}

}  // namespace perhom
