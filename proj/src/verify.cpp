#include "perhom/verify.hpp"

#include "perhom/errors.hpp"
#include "perhom/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace perhom {

TorusGrid default_grid(const LevyTripletModel& model, const std::vector<int>& resolution) {
    if (!resolution.empty()) {
        if (resolution.size() == 1) return TorusGrid(model.geometry(), resolution.front());
        return TorusGrid(model.geometry(), resolution);
    }
    const int n = model.dim() == 1 ? 256 : model.dim() == 2 ? 32 : 12;
    return TorusGrid(model.geometry(), n);
}

namespace {

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e);
    }
}

std::vector<const PathEnsemble*> by_decreasing_epsilon(const std::vector<PathEnsemble>& ensembles) {
    if (ensembles.size() < 2) throw Error(ErrorCode::InsufficientEpsilons, "need at least two epsilon values");
    std::vector<const PathEnsemble*> out;
    for (const auto& e : ensembles) out.push_back(&e);
    std::stable_sort(out.begin(), out.end(),
                     [](const auto* a, const auto* b) { return a->config.epsilon > b->config.epsilon; });
    for (std::size_t k = 1; k < out.size(); ++k) {
        if (out[k]->config.epsilon == out[k - 1]->config.epsilon) {
            throw Error(ErrorCode::InsufficientEpsilons, "epsilon values must be distinct");
        }
    }
    return out;
}

}  // namespace

SolvedModel solve_model(const LevyTripletModel& model, const TorusGrid& grid, unsigned workers) {
    SolvedModel s;
    s.grid = grid;
    s.validation = staged("validate", [&] {
        ValidationReport r = validate(model, grid);
        if (!r.ok()) {
            std::string failed;
            for (const auto& c : r.checks) {
                if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
            }
            throw Error(ErrorCode::ModelInvalid, "validation failed: " + failed);
        }
        return r;
    });
    s.generator = staged("assemble", [&] { return assemble(model, grid, AssembleOptions{workers}); });
    s.pi = staged("invariant", [&] { return solve_invariant(s.generator); });
    s.corrector = staged("corrector", [&] { return solve_corrector(model, s.generator, s.pi, grid); });
    s.law = staged("sigma", [&] { return assemble_sigma(model, grid, s.pi, s.corrector); });
    return s;
}

Etp2Result check_etp2(const std::vector<PathEnsemble>& ensembles, const EffectiveLaw& law, double tol) {
    const auto sorted = by_decreasing_epsilon(ensembles);
    const int d = law.dim();
    Etp2Result res;
    res.tolerance = tol;
    const double T = sorted.front()->config.T;
    res.target = T * law.sigma_symmetric();
    Mat scale(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) scale(i, j) = std::sqrt(std::abs(res.target(i, i) * res.target(j, j)));
    }
    for (const auto* e : sorted) {
        if (e->dim != d) throw Error(ErrorCode::DimensionMismatch, "ensemble dimension differs from the law");
        if (e->config.T != T) throw Error(ErrorCode::InvalidArgument, "all ensembles must share the horizon T");
        Etp2Row row;
        row.epsilon = e->config.epsilon;
        row.mean = Mat(d, d);
        row.se = Mat(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                const auto col = e->ctilde.col(i + d * j);
                const auto ms = stats::mean_se({col.data(), static_cast<std::size_t>(col.size())});
                row.mean(i, j) = ms.mean;
                row.se(i, j) = ms.se;
                if (ms.se > tol * scale(i, j) && scale(i, j) > 0.0) {
                    throw Error(ErrorCode::InsufficientPaths,
                                "standard error " + std::to_string(ms.se) + " at eps = " + std::to_string(row.epsilon) +
                                    " exceeds tol * |T Sigma|; add paths");
                }
            }
        }
        row.discrepancy = row.mean - res.target;
        res.rows.push_back(std::move(row));
    }
    const Etp2Row& last = res.rows.back();
    res.within = true;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double band = std::max(tol * scale(i, j), 3.0 * last.se(i, j));
            if (!(std::abs(last.discrepancy(i, j)) <= band)) res.within = false;
        }
    }
    res.monotone = true;
    for (std::size_t k = 1; k < res.rows.size(); ++k) {
        const auto& prev = res.rows[k - 1];
        const auto& cur = res.rows[k];
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                // Allow one SE, and never less than accumulated round-off.
                const double slack = std::max(cur.se(i, j), 1e-10 * scale(i, j));
                if (std::abs(cur.discrepancy(i, j)) > std::abs(prev.discrepancy(i, j)) + slack) res.monotone = false;
            }
        }
    }
    res.passed = res.within && res.monotone;
    return res;
}

double etp1_envelope(const Etp1BoundInputs& in, double epsilon, double delta, double t) {
    if (in.model == nullptr || in.grid == nullptr) return std::numeric_limits<double>::quiet_NaN();
    if (!(2.0 * epsilon * in.beta_sup < delta / 2.0)) return std::numeric_limits<double>::quiet_NaN();
    const auto& jumps = in.model->jumps();
    const double radius = delta / (2.0 * epsilon);
    const auto norms = jumps.node_norms();
    std::vector<double> w(jumps.node_count());
    double tail = 0.0;
    for (std::size_t j = 0; j < in.grid->size(); ++j) {
        const Vec x = in.grid->node(j);
        jumps.weights_at(x.data(), in.model->geometry(), w);
        double s = 0.0;
        for (std::size_t m = 0; m < w.size(); ++m) {
            if (norms[m] > radius) s += w[m] * norms[m] * norms[m];
        }
        tail = std::max(tail, s);
    }
    const double lead = 8.0 * std::sqrt(2.0 * in.Gamma / in.gamma) * epsilon * std::sqrt(t) / (delta * delta);
    return (lead + 4.0 * t / (delta * delta)) * tail;
}

Etp1Result check_etp1(const std::vector<PathEnsemble>& ensembles, double tol,
                      const std::optional<Etp1BoundInputs>& bound) {
    const auto sorted = by_decreasing_epsilon(ensembles);
    Etp1Result res;
    res.tolerance = tol;
    res.deltas = sorted.front()->config.deltas;
    for (const auto* e : sorted) {
        if (e->config.deltas != res.deltas) throw Error(ErrorCode::InvalidArgument, "ensembles use different jump thresholds");
        Etp1Row row;
        row.epsilon = e->config.epsilon;
        for (std::size_t q = 0; q < res.deltas.size(); ++q) {
            const auto col = e->large_jumps.col(static_cast<Eigen::Index>(q));
            row.counts.push_back(stats::mean_se({col.data(), static_cast<std::size_t>(col.size())}));
            row.bound.push_back(bound ? etp1_envelope(*bound, row.epsilon, res.deltas[q], e->config.T)
                                      : std::numeric_limits<double>::quiet_NaN());
        }
        res.rows.push_back(std::move(row));
    }
    const bool no_kernel = bound && bound->model != nullptr
                               ? bound->model->jumps().family() == KernelFamily::None
                               : std::all_of(sorted.begin(), sorted.end(), [](const auto* e) {
                                     return std::all_of(e->jumps.begin(), e->jumps.end(), [](auto j) { return j == 0; });
                                 });
    res.decreasing = true;
    res.below_tolerance = true;
    for (std::size_t q = 0; q < res.deltas.size(); ++q) {
        for (std::size_t k = 1; k < res.rows.size(); ++k) {
            const double prev = res.rows[k - 1].counts[q].mean;
            const double cur = res.rows[k].counts[q].mean;
            if (!(cur < prev || (cur == 0.0 && prev == 0.0))) res.decreasing = false;
        }
        if (!(res.rows.back().counts[q].mean < tol)) res.below_tolerance = false;
    }
    res.vacuous = no_kernel;
    res.passed = res.vacuous || (res.decreasing && res.below_tolerance);
    return res;
}

SigmaEstimate sigma_mc(const PathEnsemble& ensemble) {
    const int d = ensemble.dim;
    const auto n = static_cast<double>(ensemble.size());
    const Mat z = ensemble.endpoints / std::sqrt(ensemble.config.T);
    SigmaEstimate s;
    s.mean = z.colwise().mean().transpose();
    s.mean_se = Vec(d);
    const Mat c = z.rowwise() - s.mean.transpose();
    s.sigma = Mat(d, d);
    s.se = Mat(d, d);
    for (int i = 0; i < d; ++i) {
        s.mean_se[i] = n > 1 ? std::sqrt(c.col(i).squaredNorm() / (n - 1) / n) : 0.0;
        for (int j = 0; j < d; ++j) {
            const Vec prod = c.col(i).cwiseProduct(c.col(j));
            const auto ms = stats::mean_se({prod.data(), static_cast<std::size_t>(prod.size())});
            s.sigma(i, j) = n > 1 ? ms.mean * n / (n - 1) : ms.mean;
            s.se(i, j) = ms.se;
        }
    }
    return s;
}

GaussianityResult check_gaussianity(const PathEnsemble& ensemble, const EffectiveLaw& law, double alpha) {
    GaussianityResult g;
    g.epsilon = ensemble.config.epsilon;
    g.n = ensemble.size();
    g.alpha = alpha;
    if (g.n < 1000) {
        throw Error(ErrorCode::InsufficientPaths, "Gaussianity check needs at least 1000 paths, got " + std::to_string(g.n));
    }
    const auto root = stats::pseudo_inverse_root(law.sigma_symmetric());
    g.rank = root.rank;
    if (g.rank == 0) {
        g.vacuous = true;
        g.ks_passed = true;
        g.passed = true;
        g.warning = "Sigma is zero; the limit is degenerate and the test is vacuous";
        return g;
    }
    if (g.rank < law.dim()) g.warning = "Sigma is singular; whitened in its range (rank " + std::to_string(g.rank) + ")";
    const Mat w = (ensemble.endpoints * root.root.transpose()) / std::sqrt(ensemble.config.T);
    g.ks_passed = true;
    for (Eigen::Index k = 0; k < w.cols(); ++k) {
        std::vector<double> col(w.col(k).data(), w.col(k).data() + w.rows());
        g.ks.push_back(stats::ks_normal(std::move(col)));
        if (!(g.ks.back().p_value > alpha)) g.ks_passed = false;
    }
    g.wald = stats::covariance_wald(w);
    g.passed = g.ks_passed && g.wald.p_value > alpha;
    return g;
}

VerificationReport full_report(const LevyTripletModel& model, const VerifyConfig& config) {
    VerificationReport rep;
    rep.model_name = model.name();
    rep.model_hash = model_hash(model);
    rep.config = config;
    if (config.epsilons.size() < 2) {
        throw StageError("config", Error(ErrorCode::InsufficientEpsilons, "need at least two epsilon values"));
    }
    const TorusGrid grid = staged("grid", [&] { return default_grid(model, config.resolution); });
    rep.solved = solve_model(model, grid, config.sim.workers);
    const SolvedModel& s = rep.solved;

    try {
        rep.ergodicity = estimate_ergodicity(s.generator, s.pi, config.ergodicity_horizon);
    } catch (const Error& e) {
        rep.ergodicity_error = e.what();
    }

    std::vector<double> eps = config.epsilons;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    for (double e : eps) {
        SimulationConfig sc = config.sim;
        sc.epsilon = e;
        rep.ensembles.push_back(
            staged("simulate", [&] { return simulate_paths(model, s.law, sc, &s.corrector, &s.grid); }));
    }
    const PathEnsemble& smallest = rep.ensembles.back();
    rep.sigma_mc = sigma_mc(smallest);

    std::optional<Etp1BoundInputs> bound;
    if (rep.ergodicity) {
        bound = Etp1BoundInputs{rep.ergodicity->gamma, rep.ergodicity->Gamma,
                                s.corrector.beta.size() ? s.corrector.beta.cwiseAbs().maxCoeff() : 0.0, &model, &s.grid};
    }
    rep.etp2 = staged("etp2", [&] { return check_etp2(rep.ensembles, s.law, config.etp2_tol); });
    rep.etp1 = staged("etp1", [&] { return check_etp1(rep.ensembles, config.etp1_tol, bound); });
    rep.gaussianity = staged("gaussianity", [&] { return check_gaussianity(smallest, s.law, config.alpha); });

    auto verdict = [&](std::string name, bool ok, std::string detail) {
        rep.verdicts.push_back({std::move(name), ok, std::move(detail)});
    };
    verdict("sigma-psd", s.law.positive_semidefinite, "min eigenvalue >= -1e-10 trace");
    verdict("etp2", rep.etp2.passed,
            std::string(rep.etp2.within ? "within band" : "outside band") + ", " +
                (rep.etp2.monotone ? "monotone" : "not monotone"));
    verdict("etp1", rep.etp1.passed,
            rep.etp1.vacuous ? "no jump kernel"
                             : std::string(rep.etp1.decreasing ? "decreasing" : "not decreasing") + ", " +
                                   (rep.etp1.below_tolerance ? "below tolerance" : "above tolerance"));
    verdict("gaussianity", rep.gaussianity.passed,
            rep.gaussianity.vacuous ? "vacuous (rank 0)"
                                    : std::string("KS ") + (rep.gaussianity.ks_passed ? "pass" : "fail") + ", Wald p = " +
                                          std::to_string(rep.gaussianity.wald.p_value));
    rep.passed = std::all_of(rep.verdicts.begin(), rep.verdicts.end(), [](const Verdict& v) { return v.passed; });
    return rep;
}

}  // namespace perhom
