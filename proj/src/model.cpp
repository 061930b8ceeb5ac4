#include "perhom/model.hpp"

#include "perhom/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace perhom {

void DriftField::eval(const double* x, const std::vector<double>& periods, double* out) const noexcept {
    for (std::size_t i = 0; i < components_.size(); ++i) out[i] = components_[i].eval(x, periods);
}

bool DriftField::is_zero() const noexcept {
    return std::all_of(components_.begin(), components_.end(),
                       [](const TrigField& f) { return f.is_constant() && f.constant() == 0.0; });
}

DiffusionField::DiffusionField(int dim, std::vector<TrigField> upper) : dim_(dim), upper_(std::move(upper)) {
    if (upper_.size() != static_cast<std::size_t>(dim * (dim + 1) / 2)) {
        throw Error(ErrorCode::DimensionMismatch, "diffusion field needs d(d+1)/2 upper-triangle entries");
    }
}

const TrigField& DiffusionField::entry(int i, int j) const {
    if (i > j) std::swap(i, j);
    // Row-major upper triangle: row i starts at i*d - i*(i-1)/2.
    const int offset = i * dim_ - i * (i - 1) / 2;
    return upper_[static_cast<std::size_t>(offset + (j - i))];
}

void DiffusionField::eval(const double* x, const std::vector<double>& periods, double* out) const noexcept {
    std::size_t u = 0;
    for (int i = 0; i < dim_; ++i) {
        for (int j = i; j < dim_; ++j, ++u) {
            const double v = upper_[u].eval(x, periods);
            out[i + j * dim_] = v;
            out[j + i * dim_] = v;
        }
    }
}

bool DiffusionField::is_zero() const noexcept {
    return std::all_of(upper_.begin(), upper_.end(),
                       [](const TrigField& f) { return f.is_constant() && f.constant() == 0.0; });
}

LevyTripletModel::LevyTripletModel(std::string name, TorusGeometry geometry, DriftField drift,
                                   DiffusionField diffusion, JumpKernel jumps)
    : name_(std::move(name)),
      geometry_(std::move(geometry)),
      drift_(std::move(drift)),
      diffusion_(std::move(diffusion)),
      jumps_(std::move(jumps)) {
    const int d = geometry_.dim();
    if (drift_.dim() != d) throw Error(ErrorCode::DimensionMismatch, "drift has wrong number of components");
    if (diffusion_.dim() != d) throw Error(ErrorCode::DimensionMismatch, "diffusion has wrong dimension");
    if (jumps_.dim() != d) throw Error(ErrorCode::DimensionMismatch, "jump kernel has wrong dimension");
    auto check_waves = [d](const TrigField& f) {
        for (const auto& t : f.terms()) {
            if (static_cast<int>(t.wave.size()) != d) {
                throw Error(ErrorCode::DimensionMismatch, "trig term wave vector has wrong dimension");
            }
        }
    };
    for (const auto& f : drift_.components()) check_waves(f);
    for (const auto& f : diffusion_.upper()) check_waves(f);
    if (const auto* atoms = std::get_if<std::vector<Atom>>(&jumps_.spec())) {
        for (const auto& a : *atoms) check_waves(a.rate);
    } else if (const auto* conv = std::get_if<ConvolutionSpec>(&jumps_.spec())) {
        check_waves(conv->lambda);
        check_waves(conv->mu);
    } else if (const auto* st = std::get_if<StableLikeSpec>(&jumps_.spec())) {
        check_waves(st->alpha);
        check_waves(st->kappa);
    }
}

Vec LevyTripletModel::drift_at(const Vec& x) const {
    const Vec w = geometry_.wrap(x);
    Vec out(dim());
    drift_.eval(w.data(), geometry_.periods(), out.data());
    return out;
}

Mat LevyTripletModel::diffusion_at(const Vec& x) const {
    const Vec w = geometry_.wrap(x);
    Mat out(dim(), dim());
    diffusion_.eval(w.data(), geometry_.periods(), out.data());
    return out;
}

std::vector<double> LevyTripletModel::jump_weights_at(const Vec& x) const {
    return jumps_.weights_at(x, geometry_);
}

Vec effective_drift_coefficient(const LevyTripletModel& model, const Vec& x) {
    Vec out = model.drift_at(x);
    const auto& jumps = model.jumps();
    if (jumps.node_count() == 0) return out;
    const auto w = model.jump_weights_at(x);
    const auto norms = jumps.node_norms();
    for (std::size_t m = 0; m < w.size(); ++m) {
        if (norms[m] >= 1.0) out += w[m] * jumps.nodes().col(static_cast<Eigen::Index>(m));
    }
    return out;
}

std::complex<double> eval_symbol(const LevyTripletModel& model, const Vec& x, const Vec& xi) {
    if (xi.size() != model.dim()) throw Error(ErrorCode::DimensionMismatch, "xi has wrong dimension");
    const Vec b = model.drift_at(x);
    const Mat c = model.diffusion_at(x);
    std::complex<double> q{0.5 * xi.dot(c * xi), -xi.dot(b)};
    const auto& jumps = model.jumps();
    if (jumps.node_count() > 0) {
        const auto w = model.jump_weights_at(x);
        const auto norms = jumps.node_norms();
        for (std::size_t m = 0; m < w.size(); ++m) {
            const double s = xi.dot(jumps.nodes().col(static_cast<Eigen::Index>(m)));
            const double compensator = norms[m] < 1.0 ? s : 0.0;
            q += w[m] * std::complex<double>(1.0 - std::cos(s), -std::sin(s) + compensator);
        }
    }
    return q;
}

bool ValidationReport::ok() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

namespace {

/// All coefficient values at a wrapped point, flattened, for periodicity comparison.
std::vector<double> coefficient_snapshot(const LevyTripletModel& model, const Vec& x) {
    const int d = model.dim();
    std::vector<double> out(static_cast<std::size_t>(d + d * d) + model.jumps().node_count());
    const Vec w = model.geometry().wrap(x);
    model.drift().eval(w.data(), model.geometry().periods(), out.data());
    model.diffusion().eval(w.data(), model.geometry().periods(), out.data() + d);
    if (model.jumps().node_count() > 0) {
        model.jumps().weights_at(w.data(), model.geometry(),
                                 std::span<double>(out.data() + d + d * d, model.jumps().node_count()));
    }
    return out;
}

}  // namespace

ValidationReport validate(const LevyTripletModel& model, const TorusGrid& grid) {
    ValidationReport report;
    const int d = model.dim();
    const auto& geom = model.geometry();
    if (!(grid.geometry() == geom)) {
        report.checks.push_back({"grid-geometry", false, 0.0, "grid torus differs from the model torus"});
        return report;
    }
    const auto& jumps = model.jumps();
    const std::size_t nodes_m = jumps.node_count();
    const auto norms = jumps.node_norms();
    const Mat& ys = jumps.nodes();

    double periodicity_dev = 0.0;
    double psd_worst = std::numeric_limits<double>::infinity();
    double min_weight = std::numeric_limits<double>::infinity();
    double m2_sup = 0.0;
    bool symmetric = true;
    bool zero_drift = true;
    double worst_asym = 0.0;

    Vec x(d), bx(d);
    Mat cx(d, d);
    std::vector<double> w(nodes_m);
    const std::size_t stride = std::max<std::size_t>(1, grid.size() / 64);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        grid.node(j, std::span<double>(x.data(), static_cast<std::size_t>(d)));
        model.drift().eval(x.data(), geom.periods(), bx.data());
        if (bx.cwiseAbs().maxCoeff() != 0.0) zero_drift = false;
        model.diffusion().eval(x.data(), geom.periods(), cx.data());
        if (d == 1) {
            psd_worst = std::min(psd_worst, cx(0, 0) + 1e-12 * std::abs(cx(0, 0)));
        } else {
            Eigen::SelfAdjointEigenSolver<Mat> es(cx, Eigen::EigenvaluesOnly);
            const double tr = std::abs(cx.trace());
            psd_worst = std::min(psd_worst, es.eigenvalues().minCoeff() + 1e-12 * tr);
        }
        if (nodes_m > 0) {
            jumps.weights_at(x.data(), geom, w);
            Vec first = Vec::Zero(d);
            double scale = 0.0;
            double m2 = 0.0;
            for (std::size_t m = 0; m < nodes_m; ++m) {
                min_weight = std::min(min_weight, w[m]);
                first += w[m] * ys.col(static_cast<Eigen::Index>(m));
                scale += std::abs(w[m]) * norms[m];
                m2 += w[m] * norms[m] * norms[m];
            }
            m2_sup = std::max(m2_sup, m2);
            const double asym = first.norm();
            if (scale > 0.0) worst_asym = std::max(worst_asym, asym / scale);
            if (asym > 1e-10 * scale) symmetric = false;
        }
        if (j % stride == 0) {
            const auto base = coefficient_snapshot(model, x);
            for (int k = 0; k < d; ++k) {
                for (int shift : {-3, 1, 7}) {
                    Vec xs = x;
                    xs[k] += shift * geom.period(k);
                    const auto moved = coefficient_snapshot(model, xs);
                    for (std::size_t i = 0; i < base.size(); ++i) {
                        const double tol = 1e-12 * (1.0 + std::abs(base[i]));
                        const double dev = std::abs(base[i] - moved[i]);
                        periodicity_dev = std::max(periodicity_dev, dev > tol ? dev : 0.0);
                    }
                }
            }
        }
    }
    report.symmetric = symmetric;
    report.zero_drift = zero_drift;
    report.second_moment_sup = m2_sup;
    report.neglected_second_moment = jumps.neglected_second_moment();

    report.checks.push_back({"periodicity", periodicity_dev == 0.0, periodicity_dev,
                             "coefficients at x and x + tau*k agree after wrapping"});
    report.checks.push_back({"diffusion-psd", psd_worst >= 0.0, psd_worst,
                             psd_worst >= 0.0 ? "c(x) symmetric positive semi-definite"
                                              : "c(x) has a negative eigenvalue"});
    if (nodes_m > 0) {
        report.checks.push_back({"kernel-nonnegative", min_weight >= 0.0, min_weight,
                                 min_weight >= 0.0 ? "kernel weights non-negative" : "negative kernel mass"});
        const double min_norm = *std::min_element(norms.begin(), norms.end());
        report.checks.push_back({"no-origin-node", min_norm > 0.0, min_norm, "nu(x, {0}) = 0"});
    }
    if (const auto* st = std::get_if<StableLikeSpec>(&jumps.spec())) {
        const double lo = st->alpha.lower_bound();
        const double hi = st->alpha.upper_bound();
        const bool ok = lo > 0.0 && hi < 2.0;
        report.checks.push_back({"stability-index", ok, hi,
                                 ok ? "alpha(x) within (0, 2)" : "second-moment/stability bound violated: alpha outside (0, 2)"});
        report.checks.push_back({"skew-range", std::abs(st->skew) <= 1.0, st->skew, "|skew| <= 1"});
    }
    const double total_m2 = m2_sup + report.neglected_second_moment;
    const bool m2_ok = std::isfinite(total_m2) && total_m2 <= model.second_moment_bound();
    report.checks.push_back({"second-moment", m2_ok, total_m2,
                             m2_ok ? "sup_x int |y|^2 nu(x,dy) within declared bound"
                                   : "second-moment/stability bound violated"});
    std::string sym_detail = symmetric ? "kernel numerically symmetric" : "kernel asymmetric";
    bool sym_ok = true;
    if (model.declared_symmetric().has_value() && *model.declared_symmetric() != symmetric) {
        sym_ok = false;
        sym_detail = "declared symmetry contradicts numeric test";
    }
    report.checks.push_back({"symmetry", sym_ok, worst_asym, sym_detail});
    return report;
}

}  // namespace perhom
