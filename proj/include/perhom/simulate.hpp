#pragma once

#include "perhom/corrector.hpp"
#include "perhom/effective.hpp"
#include "perhom/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace perhom {

enum class SmallJumpMode { Gaussian, Drop };
enum class StartMode { Point, Uniform };

const char* to_string(SmallJumpMode mode) noexcept;
const char* to_string(StartMode mode) noexcept;

struct SimulationConfig {
    double dt = 0.01;                 ///< unscaled time step (rounded down so the horizon is hit exactly)
    double T = 1.0;                   ///< scaled horizon; the unscaled run lasts T / eps^2
    double epsilon = 1.0;
    std::size_t n_paths = 1000;
    std::uint64_t seed = 1;
    double small_jump_cutoff = 0.1;   ///< density kernels: nodes below this are not sampled as jumps
    SmallJumpMode small_jumps = SmallJumpMode::Gaussian;
    StartMode start = StartMode::Point;
    std::vector<double> x0;           ///< start point (origin when empty)
    std::vector<double> deltas{0.5};  ///< thresholds for scaled-jump counts
    int mesh_points = 0;              ///< extra equally spaced samples of Y on (0, T)
    bool accumulate = true;           ///< accumulate the modified second characteristic
    unsigned workers = 1;

    void validate() const;
};

struct PathEnsemble {
    SimulationConfig config;
    int dim = 0;
    std::uint64_t steps_per_path = 0;
    double dt_used = 0.0;
    Mat endpoints;                     ///< n x d, Y_T
    std::vector<double> mesh_times;
    Mat mesh;                          ///< n x (mesh_points * d)
    Mat ctilde;                        ///< n x d^2 (column-major per path), modified second characteristic at T
    std::vector<std::uint64_t> jumps;  ///< accepted jumps per path (unscaled)
    Mat large_jumps;                   ///< n x |deltas|, scaled jumps with |eps (y - dbeta)| > delta
    double small_jump_second_moment = 0.0;  ///< sup_x int_{|y| < cutoff} |y|^2 nu (the bias if dropped)
    double neglected_second_moment = 0.0;   ///< below the kernel quadrature
    bool corrector_used = false;

    std::size_t size() const noexcept { return static_cast<std::size_t>(endpoints.rows()); }
    /// Mean of ctilde over paths as a d x d matrix.
    Mat ctilde_mean() const;
};

struct SimulationCost {
    std::uint64_t steps_per_path = 0;
    double total_steps = 0.0;
};

SimulationCost simulation_cost(const SimulationConfig& cfg);

/// Euler steps for b and c, exact thinning against the dominating kernel for
/// jumps; Y^eps_t = eps X_{t/eps^2} - b_bar* t / eps. When `corr` is given, the
/// characteristic integrand and scaled jump sizes use the corrector (multilinear
/// interpolation on `grid`); it may be omitted only when law.reduced_path_used.
PathEnsemble simulate_paths(const LevyTripletModel& model, const EffectiveLaw& law, const SimulationConfig& cfg,
                            const CorrectorField* corr = nullptr, const TorusGrid* grid = nullptr);

}  // namespace perhom
