#pragma once

#include "perhom/grid.hpp"
#include "perhom/model.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace perhom {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Sparse N x N matrix approximating the generator on grid functions.
struct GeneratorMatrix {
    SparseMatrix matrix;
    std::optional<TorusGrid> grid;  ///< absent for matrices built directly from entries
    std::string stencil = "central-2";
    std::string jump_scheme = "multilinear";
    double folding_radius = 0.0;    ///< density-kernel nodes with |y| below this act as diffusion
    double max_row_repair = 0.0;    ///< largest diagonal change made by the row-sum repair
    std::uint64_t model_hash = 0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
    /// Max absolute row sum.
    double norm_inf() const;
    double max_abs_entry() const;
    /// max_i |sum_j G_ij|.
    double max_row_sum() const;

    /// Wraps an explicit rate matrix (rows must sum to zero).
    static GeneratorMatrix from_matrix(SparseMatrix m);
};

struct AssembleOptions {
    unsigned workers = 1;
};

/// Nodes of density kernels closer than this to the origin are folded into
/// the diffusion term (second-order Taylor expansion); 2 * max grid spacing.
double folding_radius(const TorusGrid& grid);

/// Central differences for drift and diffusion, multilinear spreading of
/// jump targets, compensator on the same gradient stencil, and diagonal set
/// to minus the off-diagonal row sum.
GeneratorMatrix assemble(const LevyTripletModel& model, const TorusGrid& grid, const AssembleOptions& options = {});

Vec apply(const GeneratorMatrix& generator, const Vec& f);

/// Row `node` of the discrete generator applied to a function on R^d rather
/// than a grid function: f is called at the unwrapped stencil points. For a
/// periodic f this equals (G f)_node up to summation order.
double apply_local(const LevyTripletModel& model, const TorusGrid& grid, std::size_t node,
                   const std::function<double(const double*)>& f);

struct TransitionMatrix {
    SparseMatrix matrix;
    int log2_substeps = 0;
    double dt = 0.0;
};

/// Smallest m >= min_log2_substeps such that I + (dt / 2^m) G is entrywise
/// non-negative. Throws PositivityUnachievable if G has a negative
/// off-diagonal entry or m would exceed 40.
int transition_substeps(const GeneratorMatrix& generator, double dt, int min_log2_substeps = 0);

/// Row-stochastic P ~ exp(dt G), computed as (I + (dt/2^m) G)^(2^m) by repeated squaring.
TransitionMatrix build_transition(const GeneratorMatrix& generator, double dt, int min_log2_substeps = 0);

/// Dense variant of build_transition for small grids.
Mat build_transition_dense(const GeneratorMatrix& generator, double dt, int min_log2_substeps = 0);

/// Coordinate-format text dump: header comments followed by "row col value" lines.
void write_coordinate_dump(std::ostream& out, const GeneratorMatrix& generator);

}  // namespace perhom
