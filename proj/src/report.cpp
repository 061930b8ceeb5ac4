#include "perhom/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace perhom {

using nlohmann::json;

namespace {

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json hex_hash(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_or_null(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

json to_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_or_null(v[i]));
    return out;
}

json to_json(const ValidationReport& report) {
    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", number_or_null(c.value)}, {"detail", c.detail}});
    }
    return {{"ok", report.ok()},
            {"checks", checks},
            {"symmetric_kernel", report.symmetric},
            {"zero_drift", report.zero_drift},
            {"reduced_sigma_applies", report.reduced_sigma_applies()},
            {"second_moment_sup", number_or_null(report.second_moment_sup)},
            {"neglected_second_moment", number_or_null(report.neglected_second_moment)}};
}

json to_json(const InvariantMeasure& pi) {
    return {{"method", pi.method},
            {"size", pi.size()},
            {"residual", pi.residual},
            {"clamped_mass", pi.clamped_mass},
            {"iterations", pi.iterations},
            {"min", pi.weights.size() ? pi.weights.minCoeff() : 0.0},
            {"max", pi.weights.size() ? pi.weights.maxCoeff() : 0.0}};
}

json to_json(const ErgodicityEstimate& est) {
    json j = {{"gamma", est.gamma},
              {"Gamma", est.Gamma},
              {"method", est.method},
              {"fit_gamma", est.fit_gamma},
              {"spectral_gap", est.spectral_gap ? json(*est.spectral_gap) : json(nullptr)},
              {"horizon", est.horizon}};
    json samples = json::array();
    for (std::size_t k = 0; k < est.times.size(); ++k) samples.push_back({est.times[k], est.tv[k]});
    j["tv_samples"] = samples;
    return j;
}

json to_json(const CorrectorField& corr) {
    json sup = json::array();
    for (Eigen::Index i = 0; i < corr.beta.cols(); ++i) sup.push_back(corr.beta.col(i).cwiseAbs().maxCoeff());
    return {{"mean_drift", to_json(corr.mean_drift)},
            {"residual_norm", corr.residual_norm},
            {"projection", corr.projection},
            {"identically_zero", corr.identically_zero},
            {"beta_sup", sup}};
}

json to_json(const EffectiveLaw& law) {
    return {{"mean_drift", to_json(law.mean_drift)},
            {"sigma", to_json(law.sigma)},
            {"terms", {{"T1", to_json(law.t1)}, {"T2", to_json(law.t2)}, {"T3", to_json(law.t3)}, {"T4", to_json(law.t4)}}},
            {"reduced_path_used", law.reduced_path_used},
            {"symmetry_defect", law.symmetry_defect},
            {"min_eigenvalue", law.min_eigenvalue},
            {"positive_semidefinite", law.positive_semidefinite},
            {"corrector_residual", law.corrector_residual},
            {"resolution", law.resolution}};
}

json to_json(const SimulationConfig& cfg) {
    return {{"dt", cfg.dt},
            {"T", cfg.T},
            {"epsilon", cfg.epsilon},
            {"n_paths", cfg.n_paths},
            {"seed", cfg.seed},
            {"small_jump_cutoff", cfg.small_jump_cutoff},
            {"small_jumps", to_string(cfg.small_jumps)},
            {"start", to_string(cfg.start)},
            {"x0", cfg.x0},
            {"deltas", cfg.deltas},
            {"mesh_points", cfg.mesh_points},
            {"accumulate", cfg.accumulate}};
}

json to_json(const Etp2Result& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"epsilon", row.epsilon},
                        {"mean", to_json(row.mean)},
                        {"se", to_json(row.se)},
                        {"discrepancy", to_json(row.discrepancy)}});
    }
    return {{"target", to_json(r.target)},
            {"tolerance", r.tolerance},
            {"rows", rows},
            {"within", r.within},
            {"monotone", r.monotone},
            {"passed", r.passed}};
}

json to_json(const Etp1Result& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        json counts = json::array();
        for (std::size_t q = 0; q < row.counts.size(); ++q) {
            counts.push_back({{"delta", r.deltas[q]},
                              {"mean", row.counts[q].mean},
                              {"se", row.counts[q].se},
                              {"envelope", number_or_null(row.bound[q])}});
        }
        rows.push_back({{"epsilon", row.epsilon}, {"counts", counts}});
    }
    return {{"deltas", r.deltas},
            {"tolerance", r.tolerance},
            {"rows", rows},
            {"vacuous", r.vacuous},
            {"decreasing", r.decreasing},
            {"below_tolerance", r.below_tolerance},
            {"passed", r.passed}};
}

json to_json(const GaussianityResult& r) {
    json ks = json::array();
    for (const auto& k : r.ks) ks.push_back({{"statistic", k.statistic}, {"p_value", k.p_value}});
    return {{"epsilon", r.epsilon},
            {"n", r.n},
            {"rank", r.rank},
            {"alpha", r.alpha},
            {"ks", ks},
            {"wald", {{"statistic", r.wald.statistic}, {"dof", r.wald.dof}, {"p_value", r.wald.p_value}}},
            {"vacuous", r.vacuous},
            {"ks_passed", r.ks_passed},
            {"passed", r.passed},
            {"warning", r.warning}};
}

json to_json(const SigmaEstimate& s) {
    return {{"sigma", to_json(s.sigma)}, {"se", to_json(s.se)}, {"mean", to_json(s.mean)}, {"mean_se", to_json(s.mean_se)}};
}

json ensemble_summary(const PathEnsemble& e) {
    const int d = e.dim;
    const SigmaEstimate s = sigma_mc(e);
    Mat ct_se(d, d);
    for (int k = 0; k < d * d; ++k) {
        const auto col = e.ctilde.col(k);
        ct_se(k % d, k / d) = stats::mean_se({col.data(), static_cast<std::size_t>(col.size())}).se;
    }
    json counts = json::array();
    for (std::size_t q = 0; q < e.config.deltas.size(); ++q) {
        const auto col = e.large_jumps.col(static_cast<Eigen::Index>(q));
        const auto ms = stats::mean_se({col.data(), static_cast<std::size_t>(col.size())});
        counts.push_back({{"delta", e.config.deltas[q]}, {"mean", ms.mean}, {"se", ms.se}});
    }
    std::vector<double> jumps(e.jumps.begin(), e.jumps.end());
    const auto jm = stats::mean_se(jumps);
    json mesh = json::array();
    for (std::size_t k = 0; k < e.mesh_times.size(); ++k) {
        const Mat block = e.mesh.middleCols(static_cast<Eigen::Index>(k) * d, d);
        mesh.push_back({{"t", e.mesh_times[k]}, {"mean", to_json(Vec(block.colwise().mean().transpose()))}});
    }
    return {{"config", to_json(e.config)},
            {"steps_per_path", e.steps_per_path},
            {"dt_used", e.dt_used},
            {"corrector_used", e.corrector_used},
            {"endpoint_moments", to_json(s)},
            {"ctilde_mean", to_json(e.ctilde_mean())},
            {"ctilde_se", to_json(ct_se)},
            {"jumps_per_path", {{"mean", jm.mean}, {"se", jm.se}}},
            {"large_jumps", counts},
            {"mesh", mesh},
            {"small_jump_second_moment", e.small_jump_second_moment},
            {"neglected_second_moment", e.neglected_second_moment}};
}

json to_json(const VerificationReport& r) {
    json verdicts = json::array();
    for (const auto& v : r.verdicts) verdicts.push_back({{"name", v.name}, {"passed", v.passed}, {"detail", v.detail}});
    json ensembles = json::array();
    for (const auto& e : r.ensembles) ensembles.push_back(ensemble_summary(e));
    const auto& c = r.config;
    return {{"schema", kReportSchema},
            {"model", {{"name", r.model_name}, {"hash", hex_hash(r.model_hash)}}},
            {"config",
             {{"resolution", r.solved.grid.resolution()},
              {"epsilons", c.epsilons},
              {"simulation", to_json(c.sim)},
              {"etp2_tol", c.etp2_tol},
              {"etp1_tol", c.etp1_tol},
              {"alpha", c.alpha},
              {"ergodicity_horizon", c.ergodicity_horizon}}},
            {"validation", to_json(r.solved.validation)},
            {"generator",
             {{"size", r.solved.generator.size()},
              {"nonzeros", r.solved.generator.matrix.nonZeros()},
              {"stencil", r.solved.generator.stencil},
              {"jump_scheme", r.solved.generator.jump_scheme},
              {"folding_radius", r.solved.generator.folding_radius},
              {"max_row_repair", r.solved.generator.max_row_repair},
              {"max_row_sum", r.solved.generator.max_row_sum()}}},
            {"invariant", to_json(r.solved.pi)},
            {"ergodicity", r.ergodicity ? to_json(*r.ergodicity) : json(nullptr)},
            {"ergodicity_error", r.ergodicity_error},
            {"corrector", to_json(r.solved.corrector)},
            {"effective_law", to_json(r.solved.law)},
            {"sigma_mc", to_json(r.sigma_mc)},
            {"ensembles", ensembles},
            {"etp2", to_json(r.etp2)},
            {"etp1", to_json(r.etp1)},
            {"gaussianity", to_json(r.gaussianity)},
            {"verdicts", verdicts},
            {"passed", r.passed}};
}

void write_invariant_csv(std::ostream& out, const TorusGrid& grid, const InvariantMeasure& pi) {
    const int d = grid.dim();
    for (int k = 0; k < d; ++k) out << "x" << k + 1 << ',';
    out << "pi\n";
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const Vec x = grid.node(j);
        for (int k = 0; k < d; ++k) out << g17(x[k]) << ',';
        out << g17(pi.weights[static_cast<Eigen::Index>(j)]) << '\n';
    }
}

void write_corrector_csv(std::ostream& out, const TorusGrid& grid, const CorrectorField& corr) {
    const int d = grid.dim();
    for (int k = 0; k < d; ++k) out << "x" << k + 1 << ',';
    for (int i = 0; i < d; ++i) out << "beta" << i + 1 << ',';
    for (int i = 0; i < d; ++i) {
        for (int k = 0; k < d; ++k) out << "d" << k + 1 << "beta" << i + 1 << (i == d - 1 && k == d - 1 ? "\n" : ",");
    }
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const Vec x = grid.node(j);
        const auto jj = static_cast<Eigen::Index>(j);
        for (int k = 0; k < d; ++k) out << g17(x[k]) << ',';
        for (int i = 0; i < d; ++i) out << g17(corr.beta(jj, i)) << ',';
        for (int q = 0; q < d * d; ++q) out << g17(corr.grad(jj, q)) << (q == d * d - 1 ? "\n" : ",");
    }
}

void write_endpoints_csv(std::ostream& out, const PathEnsemble& e) {
    out << "path";
    for (int k = 0; k < e.dim; ++k) out << ",y" << k + 1;
    out << '\n';
    for (Eigen::Index p = 0; p < e.endpoints.rows(); ++p) {
        out << p;
        for (int k = 0; k < e.dim; ++k) out << ',' << g17(e.endpoints(p, k));
        out << '\n';
    }
}

std::string text_summary(const VerificationReport& r) {
    std::ostringstream os;
    const auto& law = r.solved.law;
    os << "model " << r.model_name << " on grid";
    for (int n : r.solved.grid.resolution()) os << ' ' << n;
    os << "\n  b_bar* =";
    for (Eigen::Index i = 0; i < law.mean_drift.size(); ++i) os << ' ' << g17(law.mean_drift[i]);
    os << "\n  Sigma  =";
    for (Eigen::Index i = 0; i < law.sigma.size(); ++i) os << ' ' << g17(law.sigma.data()[i]);
    os << (law.reduced_path_used ? "  (reduced)" : "") << '\n';
    for (const auto& v : r.verdicts) os << "  " << (v.passed ? "PASS " : "FAIL ") << v.name << ": " << v.detail << '\n';
    os << (r.passed ? "verdict: PASS\n" : "verdict: FAIL\n");
    return os.str();
}

}  // namespace perhom
