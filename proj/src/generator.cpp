#include "perhom/generator.hpp"

#include "perhom/errors.hpp"
#include "perhom/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <thread>

namespace perhom {

using Triplet = Eigen::Triplet<double>;

double GeneratorMatrix::norm_inf() const {
    double best = 0.0;
    for (Eigen::Index i = 0; i < matrix.outerSize(); ++i) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(matrix, i); it; ++it) s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

double GeneratorMatrix::max_abs_entry() const {
    double best = 0.0;
    for (Eigen::Index i = 0; i < matrix.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(matrix, i); it; ++it) best = std::max(best, std::abs(it.value()));
    }
    return best;
}

double GeneratorMatrix::max_row_sum() const {
    double best = 0.0;
    for (Eigen::Index i = 0; i < matrix.outerSize(); ++i) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(matrix, i); it; ++it) s += it.value();
        best = std::max(best, std::abs(s));
    }
    return best;
}

GeneratorMatrix GeneratorMatrix::from_matrix(SparseMatrix m) {
    if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "generator matrix must be square");
    GeneratorMatrix g;
    g.matrix = std::move(m);
    g.matrix.makeCompressed();
    g.stencil = "explicit";
    g.jump_scheme = "explicit";
    return g;
}

double folding_radius(const TorusGrid& grid) { return 2.0 * grid.max_spacing(); }

namespace {

void check_resolution(const LevyTripletModel& model, const TorusGrid& grid) {
    if (!(grid.geometry() == model.geometry())) throw Error(ErrorCode::GridMismatch, "grid torus differs from model torus");
    for (int n : grid.resolution()) {
        if (n < 8 || n % 2 != 0) throw Error(ErrorCode::InvalidArgument, "grid resolution must be even and >= 8");
    }
    const auto& jumps = model.jumps();
    if (jumps.family() != KernelFamily::Atoms) return;
    const double limit = 2.0 * grid.max_spacing();
    for (double r : jumps.node_norms()) {
        if (r < limit) {
            double tmax = 0.0;
            for (double t : model.geometry().periods()) tmax = std::max(tmax, t);
            int suggest = static_cast<int>(std::ceil(2.0 * tmax / std::max(r, 1e-300)));
            suggest = std::max(8, suggest + (suggest % 2));
            throw Error(ErrorCode::ResolutionTooCoarse,
                        "atom |y| = " + std::to_string(r) + " is below 2 * grid spacing; use resolution >= " +
                            std::to_string(suggest));
        }
    }
}

struct RowScratch {
    Vec x, b, v, target, point;
    Mat c;
    std::vector<double> w;
    std::array<int, TorusGrid::kMaxDim> base{};
    std::array<int, TorusGrid::kMaxDim> multi{};
    std::array<double, TorusGrid::kMaxDim> frac{};

    explicit RowScratch(const LevyTripletModel& model)
        : x(model.dim()), b(model.dim()), v(model.dim()), target(model.dim()), point(model.dim()),
          c(model.dim(), model.dim()), w(model.jumps().node_count()) {}
};

// Visits the off-diagonal stencil of row j as (column, unwrapped point, coefficient).
// Returns the diagonal implied by the continuous coefficients (before the row-sum repair).
template <class Emit>
double visit_row(const LevyTripletModel& model, const TorusGrid& grid, double fold, std::size_t j, RowScratch& s,
                 Emit&& emit) {
    const int d = model.dim();
    const auto& geom = model.geometry();
    const auto& jumps = model.jumps();
    const std::size_t nm = jumps.node_count();
    const auto norms = jumps.node_norms();
    const Mat& ys = jumps.nodes();
    const bool density = jumps.is_density();

    grid.node(j, std::span<double>(s.x.data(), static_cast<std::size_t>(d)));
    grid.multi_index(j, std::span<int>(s.multi.data(), static_cast<std::size_t>(d)));
    model.drift().eval(s.x.data(), geom.periods(), s.b.data());
    model.diffusion().eval(s.x.data(), geom.periods(), s.c.data());
    s.v = s.b;
    double jump_diag = 0.0;
    if (nm > 0) {
        jumps.weights_at(s.x.data(), geom, s.w);
        for (std::size_t m = 0; m < nm; ++m) {
            const auto col = ys.col(static_cast<Eigen::Index>(m));
            if (density && norms[m] < fold) {
                s.c.noalias() += s.w[m] * col * col.transpose();
                continue;
            }
            if (norms[m] < 1.0) s.v -= s.w[m] * col;
            jump_diag -= s.w[m];
            // Multilinear spreading over the cell containing x + y (unwrapped).
            for (int k = 0; k < d; ++k) {
                const double t = (s.x[k] + col[k]) / grid.spacing(k);
                const double fl = std::floor(t);
                s.base[static_cast<std::size_t>(k)] = static_cast<int>(fl);
                s.frac[static_cast<std::size_t>(k)] = t - fl;
            }
            for (int mask = 0; mask < (1 << d); ++mask) {
                double weight = s.w[m];
                std::array<int, TorusGrid::kMaxDim> idx{};
                for (int k = 0; k < d; ++k) {
                    const auto kk = static_cast<std::size_t>(k);
                    const int bit = (mask >> k) & 1;
                    weight *= bit ? s.frac[kk] : 1.0 - s.frac[kk];
                    idx[kk] = s.base[kk] + bit;
                    s.point[k] = idx[kk] * grid.spacing(k);
                }
                if (weight == 0.0) continue;
                emit(grid.index(std::span<const int>(idx.data(), static_cast<std::size_t>(d))), s.point.data(), weight);
            }
        }
    }
    double nominal_diag = jump_diag;
    for (int k = 0; k < d; ++k) {
        const double h = grid.spacing(k);
        nominal_diag -= s.c(k, k) / (h * h);
        const std::size_t up = grid.neighbor(j, k, +1);
        const std::size_t dn = grid.neighbor(j, k, -1);
        s.point = s.x;
        s.point[k] = s.x[k] + h;
        emit(up, s.point.data(), s.v[k] / (2.0 * h) + 0.5 * s.c(k, k) / (h * h));
        s.point[k] = s.x[k] - h;
        emit(dn, s.point.data(), -s.v[k] / (2.0 * h) + 0.5 * s.c(k, k) / (h * h));
        for (int l = k + 1; l < d; ++l) {
            const double hl = grid.spacing(l);
            const double coef = s.c(k, l) / (4.0 * h * hl);
            if (coef == 0.0) continue;
            for (int sk : {+1, -1}) {
                for (int sl : {+1, -1}) {
                    s.point = s.x;
                    s.point[k] = s.x[k] + sk * h;
                    s.point[l] = s.x[l] + sl * hl;
                    emit(grid.neighbor(grid.neighbor(j, k, sk), l, sl), s.point.data(), sk * sl * coef);
                }
            }
        }
    }
    return nominal_diag;
}

void assemble_rows(const LevyTripletModel& model, const TorusGrid& grid, double fold, std::size_t row_begin,
                   std::size_t row_end, std::vector<Triplet>& out, double& max_repair) {
    RowScratch scratch(model);
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t j = row_begin; j < row_end; ++j) {
        row.clear();
        const double nominal_diag = visit_row(model, grid, fold, j, scratch,
                                              [&](std::size_t col, const double*, double coef) { row.emplace_back(col, coef); });
        // Merge duplicates in a fixed order, then repair the diagonal.
        std::stable_sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        double off_sum = 0.0;
        std::size_t i = 0;
        while (i < row.size()) {
            const std::size_t colj = row[i].first;
            double val = 0.0;
            while (i < row.size() && row[i].first == colj) val += row[i++].second;
            if (colj == j || val == 0.0) continue;
            out.emplace_back(static_cast<int>(j), static_cast<int>(colj), val);
            off_sum += val;
        }
        out.emplace_back(static_cast<int>(j), static_cast<int>(j), -off_sum);
        max_repair = std::max(max_repair, std::abs(-off_sum - nominal_diag));
    }
}

}  // namespace

GeneratorMatrix assemble(const LevyTripletModel& model, const TorusGrid& grid, const AssembleOptions& options) {
    check_resolution(model, grid);
    const double fold = folding_radius(grid);
    if (model.jumps().is_density() && fold >= 1.0) {
        throw Error(ErrorCode::ResolutionTooCoarse, "grid spacing too large to fold small jumps; refine the grid");
    }
    const std::size_t n = grid.size();
    const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(n)));
    std::vector<std::vector<Triplet>> parts(workers);
    std::vector<double> repairs(workers, 0.0);
    auto run = [&](unsigned wk) {
        const std::size_t begin = n * wk / workers;
        const std::size_t end = n * (wk + 1) / workers;
        assemble_rows(model, grid, fold, begin, end, parts[wk], repairs[wk]);
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> threads;
        for (unsigned wk = 0; wk < workers; ++wk) threads.emplace_back(run, wk);
        for (auto& t : threads) t.join();
    }
    std::vector<Triplet> all;
    for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());

    GeneratorMatrix g;
    g.matrix = SparseMatrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    g.matrix.setFromTriplets(all.begin(), all.end());
    g.matrix.makeCompressed();
    g.grid = grid;
    g.folding_radius = model.jumps().is_density() ? fold : 0.0;
    g.max_row_repair = *std::max_element(repairs.begin(), repairs.end());
    g.model_hash = model_hash(model);
    return g;
}

double apply_local(const LevyTripletModel& model, const TorusGrid& grid, std::size_t node,
                   const std::function<double(const double*)>& f) {
    check_resolution(model, grid);
    if (node >= grid.size()) throw Error(ErrorCode::InvalidArgument, "node index out of range");
    RowScratch scratch(model);
    const Vec x = grid.node(node);
    const double fx = f(x.data());
    double acc = 0.0;
    visit_row(model, grid, model.jumps().is_density() ? folding_radius(grid) : 0.0, node, scratch,
              [&](std::size_t, const double* p, double coef) { acc += coef * (f(p) - fx); });
    return acc;
}

Vec apply(const GeneratorMatrix& generator, const Vec& f) {
    if (static_cast<std::size_t>(f.size()) != generator.size()) {
        throw Error(ErrorCode::DimensionMismatch, "grid function length does not match generator");
    }
    return generator.matrix * f;
}

int transition_substeps(const GeneratorMatrix& generator, double dt, int min_log2_substeps) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be > 0");
    const auto& g = generator.matrix;
    double max_rate = 0.0;
    for (Eigen::Index i = 0; i < g.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(g, i); it; ++it) {
            if (it.col() == i) {
                max_rate = std::max(max_rate, -it.value());
            } else if (it.value() < 0.0) {
                throw Error(ErrorCode::PositivityUnachievable,
                            "generator has a negative off-diagonal entry; no sub-step makes I + sG non-negative");
            }
        }
    }
    int m = std::max(0, min_log2_substeps);
    while (m <= 40 && dt / std::ldexp(1.0, m) * max_rate > 1.0) ++m;
    if (m > 40) throw Error(ErrorCode::PositivityUnachievable, "diagonal dominance fails for every m <= 40");
    return m;
}

TransitionMatrix build_transition(const GeneratorMatrix& generator, double dt, int min_log2_substeps) {
    const int m = transition_substeps(generator, dt, min_log2_substeps);
    const double s = dt / std::ldexp(1.0, m);
    SparseMatrix eye(generator.matrix.rows(), generator.matrix.cols());
    eye.setIdentity();
    SparseMatrix p = eye + s * generator.matrix;
    for (int k = 0; k < m; ++k) {
        SparseMatrix sq = (p * p).pruned(0.0);
        p = std::move(sq);
    }
    p.makeCompressed();
    return TransitionMatrix{std::move(p), m, dt};
}

Mat build_transition_dense(const GeneratorMatrix& generator, double dt, int min_log2_substeps) {
    const int m = transition_substeps(generator, dt, min_log2_substeps);
    const double s = dt / std::ldexp(1.0, m);
    Mat p = Mat(generator.matrix) * s;
    p.diagonal().array() += 1.0;
    for (int k = 0; k < m; ++k) {
        Mat sq = p * p;
        p = std::move(sq);
    }
    return p;
}

void write_coordinate_dump(std::ostream& out, const GeneratorMatrix& generator) {
    char buf[96];
    out << "# perhom generator matrix, coordinate format (row col value), 0-based\n";
    std::snprintf(buf, sizeof buf, "# model_hash %016llx\n", static_cast<unsigned long long>(generator.model_hash));
    out << buf;
    out << "# resolution";
    if (generator.grid) {
        for (int n : generator.grid->resolution()) out << ' ' << n;
    }
    out << "\n# stencil " << generator.stencil << "\n# jump_scheme " << generator.jump_scheme << "\n";
    std::snprintf(buf, sizeof buf, "# folding_radius %.17g\n# max_row_repair %.17g\n", generator.folding_radius,
                  generator.max_row_repair);
    out << buf;
    out << "# size " << generator.size() << ' ' << generator.matrix.nonZeros() << "\n";
    for (Eigen::Index i = 0; i < generator.matrix.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(generator.matrix, i); it; ++it) {
            std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(it.row()),
                          static_cast<long long>(it.col()), it.value());
            out << buf;
        }
    }
}

}  // namespace perhom
