#pragma once

#include "perhom/torus.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace perhom {

/// Uniform lattice on the torus, nodes x_j = (j_k tau_k / n_k), row-major
/// (last axis fastest).
class TorusGrid {
public:
    struct Corner {
        std::size_t index;
        double weight;
    };
    static constexpr int kMaxDim = 6;
    static constexpr int kMaxCorners = 1 << kMaxDim;

    TorusGrid() = default;
    TorusGrid(TorusGeometry geometry, std::vector<int> resolution);
    /// Same resolution along every axis.
    TorusGrid(TorusGeometry geometry, int resolution);

    const TorusGeometry& geometry() const noexcept { return geometry_; }
    int dim() const noexcept { return geometry_.dim(); }
    std::size_t size() const noexcept { return size_; }
    const std::vector<int>& resolution() const noexcept { return resolution_; }
    double spacing(int k) const { return spacing_[static_cast<std::size_t>(k)]; }
    double max_spacing() const noexcept;

    std::size_t index(std::span<const int> multi) const;
    void multi_index(std::size_t j, std::span<int> out) const;
    void node(std::size_t j, std::span<double> out) const;
    Vec node(std::size_t j) const;

    /// Periodic neighbour of node j shifted by `step` cells along axis k.
    std::size_t neighbor(std::size_t j, int k, int step) const;

    /// Multilinear interpolation stencil at an already wrapped point.
    /// Writes 2^d corners (weights sum to 1) and returns their count.
    int stencil(const double* wrapped, Corner* out) const;

    /// Multilinear interpolation of a grid function at an arbitrary point.
    double interpolate(std::span<const double> values, const double* point) const;

    bool operator==(const TorusGrid& other) const {
        return geometry_ == other.geometry_ && resolution_ == other.resolution_;
    }

private:
    TorusGeometry geometry_;
    std::vector<int> resolution_;
    std::vector<double> spacing_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

}  // namespace perhom
