#include "perhom/simulate.hpp"

#include "perhom/errors.hpp"
#include "perhom/generator.hpp"
#include "perhom/rng.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>
#include <variant>

namespace perhom {

const char* to_string(SmallJumpMode mode) noexcept { return mode == SmallJumpMode::Gaussian ? "gaussian" : "drop"; }
const char* to_string(StartMode mode) noexcept { return mode == StartMode::Point ? "point" : "uniform"; }

void SimulationConfig::validate() const {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be > 0");
    if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be > 0");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1]");
    if (n_paths < 1) throw Error(ErrorCode::InvalidArgument, "n_paths must be >= 1");
    if (!(small_jump_cutoff >= 0.0)) throw Error(ErrorCode::InvalidArgument, "small_jump_cutoff must be >= 0");
    if (mesh_points < 0) throw Error(ErrorCode::InvalidArgument, "mesh_points must be >= 0");
    for (double d : deltas) {
        if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "jump thresholds must be > 0");
    }
}

Mat PathEnsemble::ctilde_mean() const {
    const Vec m = ctilde.colwise().mean().transpose();
    return Eigen::Map<const Mat>(m.data(), dim, dim);
}

SimulationCost simulation_cost(const SimulationConfig& cfg) {
    cfg.validate();
    SimulationCost c;
    const double horizon = cfg.T / (cfg.epsilon * cfg.epsilon);
    c.steps_per_path = static_cast<std::uint64_t>(std::ceil(horizon / cfg.dt - 1e-9));
    c.steps_per_path = std::max<std::uint64_t>(c.steps_per_path, 1);
    c.total_steps = static_cast<double>(c.steps_per_path) * static_cast<double>(cfg.n_paths);
    return c;
}

namespace {

constexpr int kMaxD = TorusGrid::kMaxDim;
using Small = std::array<double, kMaxD * kMaxD>;

// Lower Cholesky factor of a PSD matrix (column-major); zero pivots allowed.
void psd_cholesky(int d, const double* a, double* l) {
    double scale = 0.0;
    for (int i = 0; i < d; ++i) scale = std::max(scale, std::abs(a[i + d * i]));
    const double tol = 1e-12 * scale;
    std::fill(l, l + d * d, 0.0);
    for (int j = 0; j < d; ++j) {
        double s = a[j + d * j];
        for (int k = 0; k < j; ++k) s -= l[j + d * k] * l[j + d * k];
        if (s < -tol) {
            throw Error(ErrorCode::CholeskyFailure, "diffusion matrix is not positive semi-definite at a visited point");
        }
        if (s <= tol) continue;
        const double piv = std::sqrt(s);
        l[j + d * j] = piv;
        for (int i = j + 1; i < d; ++i) {
            double t = a[i + d * j];
            for (int k = 0; k < j; ++k) t -= l[i + d * k] * l[j + d * k];
            l[i + d * j] = t / piv;
        }
    }
}

// All trigonometric coefficients of a model flattened over the distinct wave
// vectors, so each wave costs one cos/sin pair per step. Summation order
// matches TrigField::eval.
class FieldBank {
public:
    FieldBank() = default;
    explicit FieldBank(const LevyTripletModel& model) : d_(model.dim()), periods_(model.geometry().periods()) {
        for (const auto& f : model.drift().components()) add(f);
        for (const auto& f : model.diffusion().upper()) add(f);
        if (const auto* atoms = std::get_if<std::vector<Atom>>(&model.jumps().spec())) {
            atom_rates_ = true;
            for (const auto& a : *atoms) add(a.rate);
        }
    }

    bool atom_rates() const noexcept { return atom_rates_; }
    std::size_t wave_count() const noexcept { return waves_.size() / static_cast<std::size_t>(d_); }

    // values[f] for every registered field; cs holds 2 * wave_count() scratch.
    void eval(const double* x, double* cs, double* values) const {
        const std::size_t nw = wave_count();
        for (std::size_t w = 0; w < nw; ++w) {
            const int* k = waves_.data() + w * static_cast<std::size_t>(d_);
            double phase = 0.0;
            for (int i = 0; i < d_; ++i) {
                if (k[i] != 0) phase += k[i] * (x[i] / periods_[static_cast<std::size_t>(i)]);
            }
            phase *= 2.0 * std::numbers::pi;
            cs[2 * w] = std::cos(phase);
            cs[2 * w + 1] = std::sin(phase);
        }
        for (std::size_t f = 0; f + 1 < offsets_.size(); ++f) {
            double v = constants_[f];
            for (std::size_t t = offsets_[f]; t < offsets_[f + 1]; ++t) {
                const Term& term = terms_[t];
                if (term.cos_amp != 0.0) v += term.cos_amp * cs[2 * term.wave];
                if (term.sin_amp != 0.0) v += term.sin_amp * cs[2 * term.wave + 1];
            }
            values[f] = v;
        }
    }

    // Unpacks eval() output into drift, full column-major diffusion and atom rates.
    void unpack(const double* values, double* b, double* c, double* rates, std::size_t n_rates) const {
        std::size_t f = 0;
        for (int i = 0; i < d_; ++i) b[i] = values[f++];
        for (int i = 0; i < d_; ++i) {
            for (int j = i; j < d_; ++j) {
                c[i + j * d_] = values[f];
                c[j + i * d_] = values[f++];
            }
        }
        if (atom_rates_) {
            for (std::size_t m = 0; m < n_rates; ++m) rates[m] = values[f++];
        }
    }

    std::size_t field_count() const noexcept { return constants_.size(); }

private:
    struct Term {
        std::size_t wave;
        double cos_amp;
        double sin_amp;
    };

    void add(const TrigField& field) {
        constants_.push_back(field.constant());
        if (offsets_.empty()) offsets_.push_back(0);
        for (const auto& t : field.terms()) terms_.push_back({wave_id(t.wave), t.cos_amp, t.sin_amp});
        offsets_.push_back(terms_.size());
    }

    std::size_t wave_id(const std::vector<int>& wave) {
        const std::size_t nw = wave_count();
        for (std::size_t w = 0; w < nw; ++w) {
            if (std::equal(wave.begin(), wave.end(), waves_.begin() + static_cast<std::ptrdiff_t>(w * static_cast<std::size_t>(d_)))) return w;
        }
        waves_.insert(waves_.end(), wave.begin(), wave.end());
        return nw;
    }

    int d_ = 0;
    std::vector<double> periods_;
    std::vector<int> waves_;
    std::vector<double> constants_;
    std::vector<std::size_t> offsets_;
    std::vector<Term> terms_;
    bool atom_rates_ = false;
};

struct Plan {
    int d = 0;
    std::size_t nm = 0;
    std::vector<char> sampled;   // thinned as jumps
    std::vector<char> gaussian;  // replaced by a Gaussian increment
    std::vector<char> taylor;    // corrector difference by gradient
    std::vector<std::size_t> sampled_index;
    std::vector<double> cumulative;  // of the dominating rates over sampled nodes
    double total_rate = 0.0;
    std::uint64_t steps = 0;
    double dt = 0.0;
    std::vector<std::uint64_t> mesh_steps;
    FieldBank bank;
    std::vector<double> table;  // C-tilde integrand at grid nodes (corrector runs only)
};

class PathRunner {
public:
    PathRunner(const LevyTripletModel& model, const EffectiveLaw& law, const SimulationConfig& cfg, const Plan& plan,
               const CorrectorField* corr, const TorusGrid* grid, PathEnsemble& out)
        : model_(model), law_(law), cfg_(cfg), plan_(plan), corr_(corr), grid_(grid), out_(out),
          w_(plan.nm), cs_(2 * plan.bank.wave_count()), fields_(plan.bank.field_count()),
          y_(model.jumps().nodes()) {}

    void run(std::size_t p) {
        const int d = plan_.d;
        const auto& geom = model_.geometry();
        const auto& jumps = model_.jumps();
        const double eps = cfg_.epsilon;
        PathStream rng(cfg_.seed, p);
        boost::random::normal_distribution<double> normal;

        std::array<double, kMaxD> x{}, xw{}, b{}, v{}, xi{}, dbeta{};
        Small c{}, cov{}, chol{}, jac{}, ct{};
        if (cfg_.start == StartMode::Uniform) {
            for (int k = 0; k < d; ++k) x[static_cast<std::size_t>(k)] = geom.period(k) * rng.uniform();
        } else if (!cfg_.x0.empty()) {
            for (int k = 0; k < d; ++k) x[static_cast<std::size_t>(k)] = cfg_.x0[static_cast<std::size_t>(k)];
        }
        const auto row = static_cast<Eigen::Index>(p);
        std::vector<double> counts(cfg_.deltas.size(), 0.0);
        std::uint64_t njumps = 0;
        double clock = plan_.total_rate > 0.0 ? rng.exponential() / plan_.total_rate
                                              : std::numeric_limits<double>::infinity();
        const double dt = plan_.dt;
        const double sdt = std::sqrt(dt);
        std::size_t next_mesh = 0;

        for (std::uint64_t s = 0; s < plan_.steps; ++s) {
            for (int k = 0; k < d; ++k) xw[static_cast<std::size_t>(k)] = geom.wrap_coord(x[static_cast<std::size_t>(k)], k);
            plan_.bank.eval(xw.data(), cs_.data(), fields_.data());
            plan_.bank.unpack(fields_.data(), b.data(), c.data(), w_.data(), plan_.nm);
            for (int k = 0; k < d; ++k) v[static_cast<std::size_t>(k)] = b[static_cast<std::size_t>(k)];
            std::copy(c.begin(), c.begin() + d * d, cov.begin());
            if (plan_.nm > 0) {
                if (!plan_.bank.atom_rates()) jumps.weights_at(xw.data(), geom, w_);
                for (std::size_t m = 0; m < plan_.nm; ++m) {
                    const double* ym = y_.data() + m * static_cast<std::size_t>(d);
                    if (plan_.sampled[m]) {
                        if (jumps.node_norms()[m] < 1.0) {
                            for (int k = 0; k < d; ++k) v[static_cast<std::size_t>(k)] -= w_[m] * ym[k];
                        }
                    } else if (plan_.gaussian[m]) {
                        for (int k = 0; k < d; ++k) {
                            for (int l = 0; l < d; ++l) cov[static_cast<std::size_t>(k + d * l)] += w_[m] * ym[k] * ym[l];
                        }
                    }
                }
            }
            if (cfg_.accumulate) accumulate(xw.data(), c.data(), jac.data(), dbeta.data(), ct.data(), dt);

            psd_cholesky(d, cov.data(), chol.data());
            for (int k = 0; k < d; ++k) xi[static_cast<std::size_t>(k)] = normal(rng);
            for (int k = 0; k < d; ++k) {
                double g = 0.0;
                for (int l = 0; l <= k; ++l) g += chol[static_cast<std::size_t>(k + d * l)] * xi[static_cast<std::size_t>(l)];
                x[static_cast<std::size_t>(k)] += v[static_cast<std::size_t>(k)] * dt + g * sdt;
            }

            // Thinning: candidate events of the dominating Poisson clock inside this step.
            double remaining = dt;
            while (clock <= remaining) {
                remaining -= clock;
                const double u = rng.uniform() * plan_.total_rate;
                auto it = std::upper_bound(plan_.cumulative.begin(), plan_.cumulative.end(), u);
                if (it == plan_.cumulative.end()) --it;
                const std::size_t m = plan_.sampled_index[static_cast<std::size_t>(it - plan_.cumulative.begin())];
                const double bound = jumps.weight_bounds()[m];
                if (rng.uniform() * bound < w_[m]) {
                    const double* ym = y_.data() + m * static_cast<std::size_t>(d);
                    double mag2 = 0.0;
                    if (corr_ != nullptr && !cfg_.deltas.empty()) {
                        jump_difference(xw.data(), jac.data(), m, ym, dbeta.data(), true);
                        for (int k = 0; k < d; ++k) {
                            const double z = ym[k] - dbeta[static_cast<std::size_t>(k)];
                            mag2 += z * z;
                        }
                    } else {
                        for (int k = 0; k < d; ++k) mag2 += ym[k] * ym[k];
                    }
                    const double mag = eps * std::sqrt(mag2);
                    for (std::size_t q = 0; q < counts.size(); ++q) {
                        if (mag > cfg_.deltas[q]) counts[q] += 1.0;
                    }
                    for (int k = 0; k < d; ++k) x[static_cast<std::size_t>(k)] += ym[k];
                    ++njumps;
                }
                clock = rng.exponential() / plan_.total_rate;
            }
            clock -= remaining;

            if (next_mesh < plan_.mesh_steps.size() && s + 1 == plan_.mesh_steps[next_mesh]) {
                const double t = out_.mesh_times[next_mesh];
                for (int k = 0; k < d; ++k) {
                    out_.mesh(row, static_cast<Eigen::Index>(next_mesh) * d + k) =
                        eps * x[static_cast<std::size_t>(k)] - law_.mean_drift[k] * t / eps;
                }
                ++next_mesh;
            }
        }

        for (int k = 0; k < d; ++k) {
            out_.endpoints(row, k) = eps * x[static_cast<std::size_t>(k)] - law_.mean_drift[k] * cfg_.T / eps;
        }
        // Scaled characteristic: eps^2 times the unscaled time integral.
        for (int k = 0; k < d * d; ++k) out_.ctilde(row, k) = eps * eps * ct[static_cast<std::size_t>(k)];
        for (std::size_t q = 0; q < counts.size(); ++q) out_.large_jumps(row, static_cast<Eigen::Index>(q)) = counts[q];
        out_.jumps[p] = njumps;
    }

private:
    double interp(std::span<const double> values, const double* point) const { return grid_->interpolate(values, point); }

    std::span<const double> beta_col(int i) const {
        return {corr_->beta.col(i).data(), static_cast<std::size_t>(corr_->beta.rows())};
    }

    void gradient_at(const double* xw, double* jac) const {
        const int d = plan_.d;
        for (int i = 0; i < d; ++i) {
            for (int k = 0; k < d; ++k) {
                const auto col = corr_->grad.col(i * d + k);
                jac[i + d * k] = interp({col.data(), static_cast<std::size_t>(col.size())}, xw);
            }
        }
    }

    // dbeta = beta(x + y) - beta(x); `fresh_jac` recomputes the gradient when not cached.
    void jump_difference(const double* xw, double* jac, std::size_t m, const double* ym, double* dbeta,
                         bool fresh_jac) const {
        const int d = plan_.d;
        if (plan_.taylor[m]) {
            if (fresh_jac) gradient_at(xw, jac);
            for (int i = 0; i < d; ++i) {
                double s = 0.0;
                for (int k = 0; k < d; ++k) s += jac[i + d * k] * ym[k];
                dbeta[i] = s;
            }
            return;
        }
        std::array<double, kMaxD> target{};
        for (int k = 0; k < d; ++k) target[static_cast<std::size_t>(k)] = xw[k] + ym[k];
        for (int i = 0; i < d; ++i) dbeta[i] = interp(beta_col(i), target.data()) - interp(beta_col(i), xw);
    }

    // Full d x d integrand (I - Dbeta) c (I - Dbeta)^T + sum_m w_m (y - dbeta)(y - dbeta)^T at a wrapped
    // point; c and the weights in w_ must already be evaluated there.
    void integrand(const double* xw, const double* c, double* jac, double* dbeta, double* out) const {
        const int d = plan_.d;
        Small a{}, ac{};
        for (int i = 0; i < d; ++i) a[static_cast<std::size_t>(i + d * i)] = 1.0;
        if (corr_ != nullptr) {
            gradient_at(xw, jac);
            for (int k = 0; k < d * d; ++k) a[static_cast<std::size_t>(k)] -= jac[k];
        }
        for (int i = 0; i < d; ++i) {
            for (int l = 0; l < d; ++l) {
                double s = 0.0;
                for (int k = 0; k < d; ++k) s += a[static_cast<std::size_t>(i + d * k)] * c[k + d * l];
                ac[static_cast<std::size_t>(i + d * l)] = s;
            }
        }
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                double s = 0.0;
                for (int l = 0; l < d; ++l) s += ac[static_cast<std::size_t>(i + d * l)] * a[static_cast<std::size_t>(j + d * l)];
                out[i + d * j] = s;
            }
        }
        std::array<double, kMaxD> z{};
        for (std::size_t m = 0; m < plan_.nm; ++m) {
            if (!plan_.sampled[m] && !plan_.gaussian[m]) continue;
            const double wm = w_[m];
            if (wm == 0.0) continue;
            const double* ym = y_.data() + m * static_cast<std::size_t>(d);
            if (corr_ != nullptr) {
                jump_difference(xw, jac, m, ym, dbeta, false);
                for (int k = 0; k < d; ++k) z[static_cast<std::size_t>(k)] = ym[k] - dbeta[k];
            } else {
                for (int k = 0; k < d; ++k) z[static_cast<std::size_t>(k)] = ym[k];
            }
            for (int i = 0; i < d; ++i) {
                for (int j = i; j < d; ++j) out[i + d * j] += wm * z[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(j)];
            }
        }
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < i; ++j) out[i + d * j] = out[j + d * i];
        }
    }

public:
    // Integrand at every grid node, row-major N x d^2.
    std::vector<double> tabulate() {
        const int d = plan_.d;
        const auto& geom = model_.geometry();
        std::vector<double> table(grid_->size() * static_cast<std::size_t>(d * d));
        std::array<double, kMaxD> xw{}, dbeta{};
        Small c{}, jac{};
        for (std::size_t j = 0; j < grid_->size(); ++j) {
            grid_->node(j, {xw.data(), static_cast<std::size_t>(d)});
            model_.diffusion().eval(xw.data(), geom.periods(), c.data());
            if (plan_.nm > 0) model_.jumps().weights_at(xw.data(), geom, w_);
            integrand(xw.data(), c.data(), jac.data(), dbeta.data(), table.data() + j * static_cast<std::size_t>(d * d));
        }
        return table;
    }

private:
    // ct += dt * integrand, read from the node table when a corrector is active.
    void accumulate(const double* xw, const double* c, double* jac, double* dbeta, double* ct, double dt) const {
        const int d = plan_.d;
        const int dd = d * d;
        if (plan_.table.empty()) {
            Small f{};
            integrand(xw, c, jac, dbeta, f.data());
            for (int k = 0; k < dd; ++k) ct[k] += dt * f[static_cast<std::size_t>(k)];
            return;
        }
        std::array<TorusGrid::Corner, TorusGrid::kMaxCorners> corners;  // filled by stencil()
        const int nc = grid_->stencil(xw, corners.data());
        for (int q = 0; q < nc; ++q) {
            const double wq = dt * corners[static_cast<std::size_t>(q)].weight;
            const double* row = plan_.table.data() + corners[static_cast<std::size_t>(q)].index * static_cast<std::size_t>(dd);
            for (int k = 0; k < dd; ++k) ct[k] += wq * row[k];
        }
    }

    const LevyTripletModel& model_;
    const EffectiveLaw& law_;
    const SimulationConfig& cfg_;
    const Plan& plan_;
    const CorrectorField* corr_;
    const TorusGrid* grid_;
    PathEnsemble& out_;
    std::vector<double> w_;
    std::vector<double> cs_;
    std::vector<double> fields_;
    const Mat& y_;
};

Plan make_plan(const LevyTripletModel& model, const SimulationConfig& cfg, const TorusGrid* grid, PathEnsemble& ens) {
    Plan plan;
    plan.d = model.dim();
    plan.bank = FieldBank(model);
    const auto& jumps = model.jumps();
    plan.nm = jumps.node_count();
    const SimulationCost cost = simulation_cost(cfg);
    plan.steps = cost.steps_per_path;
    plan.dt = cfg.T / (cfg.epsilon * cfg.epsilon) / static_cast<double>(plan.steps);
    const bool density = jumps.is_density();
    const double fold = grid != nullptr && density ? folding_radius(*grid) : 0.0;
    const auto norms = jumps.node_norms();
    const auto& bounds = jumps.weight_bounds();
    plan.sampled.assign(plan.nm, 0);
    plan.gaussian.assign(plan.nm, 0);
    plan.taylor.assign(plan.nm, 0);
    double small_m2 = 0.0;
    for (std::size_t m = 0; m < plan.nm; ++m) {
        const bool small = density && norms[m] < cfg.small_jump_cutoff;
        if (small) {
            small_m2 += bounds[m] * norms[m] * norms[m];
            plan.gaussian[m] = cfg.small_jumps == SmallJumpMode::Gaussian;
        } else {
            plan.sampled[m] = 1;
            if (bounds[m] > 0.0) {
                plan.sampled_index.push_back(m);
                plan.total_rate += bounds[m];
                plan.cumulative.push_back(plan.total_rate);
            }
            if (1.0 - std::exp(-bounds[m] * plan.dt) > 0.1) {
                throw Error(ErrorCode::StepTooLarge, "per-step jump probability of node " + std::to_string(m) +
                                                         " exceeds 0.1; reduce dt below " +
                                                         std::to_string(-std::log(0.9) / bounds[m]));
            }
        }
        plan.taylor[m] = density && norms[m] < std::max(cfg.small_jump_cutoff, fold);
    }
    ens.small_jump_second_moment = small_m2;
    ens.neglected_second_moment = jumps.neglected_second_moment();
    for (int k = 1; k <= cfg.mesh_points; ++k) {
        const double frac = static_cast<double>(k) / (cfg.mesh_points + 1);
        const auto st = static_cast<std::uint64_t>(std::llround(frac * static_cast<double>(plan.steps)));
        plan.mesh_steps.push_back(std::max<std::uint64_t>(st, 1));
        ens.mesh_times.push_back(cfg.T * static_cast<double>(plan.mesh_steps.back()) / static_cast<double>(plan.steps));
    }
    return plan;
}

}  // namespace

PathEnsemble simulate_paths(const LevyTripletModel& model, const EffectiveLaw& law, const SimulationConfig& cfg,
                            const CorrectorField* corr, const TorusGrid* grid) {
    cfg.validate();
    const int d = model.dim();
    if (law.dim() != d || law.mean_drift.size() != d) throw Error(ErrorCode::DimensionMismatch, "effective law has wrong dimension");
    if (!cfg.x0.empty() && static_cast<int>(cfg.x0.size()) != d) throw Error(ErrorCode::DimensionMismatch, "x0 has wrong dimension");
    if (corr == nullptr && !law.reduced_path_used) {
        throw Error(ErrorCode::MissingCorrector, "model has a non-trivial corrector; pass it to the simulation");
    }
    if (corr != nullptr) {
        if (grid == nullptr) throw Error(ErrorCode::InvalidArgument, "corrector given without its grid");
        if (static_cast<std::size_t>(corr->beta.rows()) != grid->size() || corr->dim() != d) {
            throw Error(ErrorCode::GridMismatch, "corrector does not match the grid");
        }
    }

    if (corr != nullptr && corr->identically_zero) corr = nullptr;

    PathEnsemble ens;
    ens.config = cfg;
    ens.dim = d;
    ens.corrector_used = corr != nullptr;
    Plan plan = make_plan(model, cfg, grid, ens);
    if (corr != nullptr && cfg.accumulate) plan.table = PathRunner(model, law, cfg, plan, corr, grid, ens).tabulate();
    ens.steps_per_path = plan.steps;
    ens.dt_used = plan.dt;
    const auto n = static_cast<Eigen::Index>(cfg.n_paths);
    ens.endpoints = Mat::Zero(n, d);
    ens.mesh = Mat::Zero(n, static_cast<Eigen::Index>(cfg.mesh_points) * d);
    ens.ctilde = Mat::Zero(n, d * d);
    ens.large_jumps = Mat::Zero(n, static_cast<Eigen::Index>(cfg.deltas.size()));
    ens.jumps.assign(cfg.n_paths, 0);

    const unsigned workers = std::max(1u, static_cast<unsigned>(std::min<std::size_t>(cfg.workers, cfg.n_paths)));
    std::mutex mu;
    std::size_t failed_path = cfg.n_paths;
    std::exception_ptr failure;
    auto work = [&](unsigned wk) {
        PathRunner runner(model, law, cfg, plan, corr, grid, ens);
        for (std::size_t p = wk; p < cfg.n_paths; p += workers) {
            try {
                runner.run(p);
            } catch (...) {
                std::lock_guard lock(mu);
                if (p < failed_path) {
                    failed_path = p;
                    failure = std::current_exception();
                }
                return;
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (unsigned wk = 0; wk < workers; ++wk) threads.emplace_back(work, wk);
        for (auto& t : threads) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return ens;
}

}  // namespace perhom
