#include "perhom/torus.hpp"

#include "perhom/errors.hpp"

namespace perhom {

TorusGeometry::TorusGeometry(std::vector<double> periods) : periods_(std::move(periods)) {
    if (periods_.empty()) throw Error(ErrorCode::InvalidArgument, "torus dimension must be >= 1");
    for (double t : periods_) {
        if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "torus periods must be finite and > 0");
    }
}

Vec TorusGeometry::wrap(const Vec& x) const {
    if (x.size() != dim()) throw Error(ErrorCode::DimensionMismatch, "point dimension does not match torus");
    Vec out(x.size());
    for (int k = 0; k < dim(); ++k) out[k] = wrap_coord(x[k], k);
    return out;
}

double TorusGeometry::volume() const noexcept {
    double v = 1.0;
    for (double t : periods_) v *= t;
    return v;
}

}  // namespace perhom
