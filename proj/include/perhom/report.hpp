#pragma once

#include "perhom/verify.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace perhom {

inline constexpr const char* kReportSchema = "perhom.report/1";

nlohmann::json to_json(const Mat& m);
nlohmann::json to_json(const Vec& v);
nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const InvariantMeasure& pi);
nlohmann::json to_json(const ErgodicityEstimate& est);
nlohmann::json to_json(const CorrectorField& corr);
nlohmann::json to_json(const EffectiveLaw& law);
/// The worker count is deliberately not echoed: it must not change any output.
nlohmann::json to_json(const SimulationConfig& cfg);
nlohmann::json to_json(const Etp2Result& r);
nlohmann::json to_json(const Etp1Result& r);
nlohmann::json to_json(const GaussianityResult& r);
nlohmann::json to_json(const SigmaEstimate& s);
nlohmann::json ensemble_summary(const PathEnsemble& ensemble);
nlohmann::json to_json(const VerificationReport& report);

/// "x_1,...,x_d,pi" rows, 17 significant digits.
void write_invariant_csv(std::ostream& out, const TorusGrid& grid, const InvariantMeasure& pi);
/// "x_1..x_d, beta_1..beta_d, dbeta_i_k ..." rows.
void write_corrector_csv(std::ostream& out, const TorusGrid& grid, const CorrectorField& corr);
void write_endpoints_csv(std::ostream& out, const PathEnsemble& ensemble);

/// Human-readable summary of a verification report.
std::string text_summary(const VerificationReport& report);

}  // namespace perhom
