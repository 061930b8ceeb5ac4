#include "perhom/grid.hpp"

#include "perhom/errors.hpp"

#include <algorithm>
#include <cmath>

namespace perhom {

TorusGrid::TorusGrid(TorusGeometry geometry, std::vector<int> resolution)
    : geometry_(std::move(geometry)), resolution_(std::move(resolution)) {
    if (static_cast<int>(resolution_.size()) != geometry_.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "grid resolution needs one entry per dimension");
    }
    if (geometry_.dim() > kMaxDim) throw Error(ErrorCode::InvalidArgument, "grids support at most 6 dimensions");
    for (int n : resolution_) {
        if (n < 2) throw Error(ErrorCode::InvalidArgument, "grid resolution must be >= 2 per dimension");
    }
    const int d = geometry_.dim();
    spacing_.resize(static_cast<std::size_t>(d));
    strides_.assign(static_cast<std::size_t>(d), 1);
    size_ = 1;
    for (int k = d - 1; k >= 0; --k) {
        const auto uk = static_cast<std::size_t>(k);
        strides_[uk] = size_;
        size_ *= static_cast<std::size_t>(resolution_[uk]);
        spacing_[uk] = geometry_.period(k) / resolution_[uk];
    }
}

TorusGrid::TorusGrid(TorusGeometry geometry, int resolution)
    : TorusGrid(geometry, std::vector<int>(static_cast<std::size_t>(geometry.dim()), resolution)) {}

double TorusGrid::max_spacing() const noexcept {
    return *std::max_element(spacing_.begin(), spacing_.end());
}

std::size_t TorusGrid::index(std::span<const int> multi) const {
    std::size_t j = 0;
    for (int k = 0; k < dim(); ++k) {
        const auto uk = static_cast<std::size_t>(k);
        const int n = resolution_[uk];
        int m = multi[uk] % n;
        if (m < 0) m += n;
        j += static_cast<std::size_t>(m) * strides_[uk];
    }
    return j;
}

void TorusGrid::multi_index(std::size_t j, std::span<int> out) const {
    for (int k = 0; k < dim(); ++k) {
        const auto uk = static_cast<std::size_t>(k);
        out[uk] = static_cast<int>((j / strides_[uk]) % static_cast<std::size_t>(resolution_[uk]));
    }
}

void TorusGrid::node(std::size_t j, std::span<double> out) const {
    for (int k = 0; k < dim(); ++k) {
        const auto uk = static_cast<std::size_t>(k);
        const auto m = (j / strides_[uk]) % static_cast<std::size_t>(resolution_[uk]);
        out[uk] = static_cast<double>(m) * geometry_.period(k) / resolution_[uk];
    }
}

Vec TorusGrid::node(std::size_t j) const {
    Vec x(dim());
    node(j, std::span<double>(x.data(), static_cast<std::size_t>(dim())));
    return x;
}

std::size_t TorusGrid::neighbor(std::size_t j, int k, int step) const {
    const auto uk = static_cast<std::size_t>(k);
    const auto n = static_cast<long long>(resolution_[uk]);
    const auto m = static_cast<long long>((j / strides_[uk]) % static_cast<std::size_t>(n));
    long long shifted = (m + step) % n;
    if (shifted < 0) shifted += n;
    return j - static_cast<std::size_t>(m) * strides_[uk] + static_cast<std::size_t>(shifted) * strides_[uk];
}

int TorusGrid::stencil(const double* wrapped, Corner* out) const {
    const int d = dim();
    std::array<std::size_t, kMaxDim> lo{};
    std::array<std::size_t, kMaxDim> hi{};
    std::array<double, kMaxDim> theta{};
    for (int k = 0; k < d; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        const int n = resolution_[uk];
        const double s = wrapped[k] / spacing_[uk];
        double fl = std::floor(s);
        double th = s - fl;
        // Wrapped input keeps fl in [0, n]; the modulo only guards misuse.
        long long i0 = static_cast<long long>(fl);
        if (i0 < 0 || i0 >= n) {
            i0 %= n;
            if (i0 < 0) i0 += n;
        }
        const long long i1 = i0 + 1 == n ? 0 : i0 + 1;
        lo[uk] = static_cast<std::size_t>(i0) * strides_[uk];
        hi[uk] = static_cast<std::size_t>(i1) * strides_[uk];
        theta[uk] = th;
    }
    const int corners = 1 << d;
    for (int c = 0; c < corners; ++c) {
        std::size_t idx = 0;
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            if (c & (1 << k)) {
                idx += hi[uk];
                w *= theta[uk];
            } else {
                idx += lo[uk];
                w *= 1.0 - theta[uk];
            }
        }
        out[c] = Corner{idx, w};
    }
    return corners;
}

double TorusGrid::interpolate(std::span<const double> values, const double* point) const {
    std::array<double, kMaxDim> w{};
    for (int k = 0; k < dim(); ++k) w[static_cast<std::size_t>(k)] = geometry_.wrap_coord(point[k], k);
    std::array<Corner, kMaxCorners> corners{};
    const int nc = stencil(w.data(), corners.data());
    double v = 0.0;
    for (int c = 0; c < nc; ++c) v += corners[static_cast<std::size_t>(c)].weight * values[corners[static_cast<std::size_t>(c)].index];
    return v;
}

}  // namespace perhom
