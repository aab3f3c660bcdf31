#pragma once

// JSON reports and run manifests. Every report carries
//   "schema": "xtalgen.report", "schema_version": N, "kind": "<subcommand>"
// and the field layout documented in docs/report_schema.json. Floats are
// written with 12 significant digits.

#include <string>

#include "json.hpp"
#include "xtalgen/io/config.hpp"
#include "xtalgen/io/files.hpp"
#include "xtalgen/workflows.hpp"

#ifndef XTALGEN_VERSION
#define XTALGEN_VERSION "0.0.0"
#endif

namespace xtalgen::report {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = XTALGEN_VERSION;

inline nlohmann::json num(double v) { return io::round_sig12(v); }
inline nlohmann::json num(const std::optional<double>& v) { return v ? num(*v) : nlohmann::json(nullptr); }

inline nlohmann::json header(const std::string& kind) {
  return {{"schema", "xtalgen.report"},
          {"schema_version", kSchemaVersion},
          {"kind", kind},
          {"artifact_version", kArtifactVersion}};
}

inline nlohmann::json validity_json(const ValiditySummary& v) {
  return {{"count", v.count},
          {"structure_pct", num(v.structure)},
          {"composition_pct", num(v.composition)},
          {"overall_pct", num(v.overall)},
          {"composition_indeterminate", v.indeterminate}};
}

inline nlohmann::json thresholds_json(const Thresholds& t, bool calibrated) {
  nlohmann::json j{{"delta_struc", num(t.delta_struc)},
                   {"delta_comp", num(t.delta_comp)},
                   {"source", calibrated ? "calibrated" : "configured"}};
  if (calibrated) {
    j["percentile"] = num(t.percentile);
    j["reference_size"] = t.reference_size;
  }
  return j;
}

inline nlohmann::json evaluation_json(const EvaluationReport& r) {
  nlohmann::json j = header("evaluate");
  j["validity"] = {{"generated", validity_json(r.generated)}, {"reference", validity_json(r.reference)}};
  const auto& c = r.coverage;
  j["coverage"] = {{"cov_r_pct", num(c.cov_r)},  {"cov_p_pct", num(c.cov_p)}, {"amsd_r", num(c.amsd_r)},
                   {"amsd_p", num(c.amsd_p)},    {"amcd_r", num(c.amcd_r)},   {"amcd_p", num(c.amcd_p)},
                   {"fingerprints", "rdf+element_stats"}};
  j["thresholds"] = thresholds_json(r.thresholds, r.thresholds_calibrated);
  nlohmann::json custom = nlohmann::json::object();
  for (const auto& [k, v] : r.properties.emd_custom) custom[k] = num(v);
  j["property_emd"] = {{"density", num(r.properties.emd_density)},
                       {"num_elements", num(r.properties.emd_num_elems)},
                       {"custom", custom}};
  return j;
}

inline nlohmann::json reconstruction_json(const ReconstructionReport& r, double sigma, const MatchOptions& m) {
  nlohmann::json j = header("reconstruct");
  j["sigma"] = num(sigma);
  j["match_options"] = {{"stol", num(m.stol)}, {"angle_tol", num(m.angle_tol)}, {"ltol", num(m.ltol)}};
  j["total"] = r.total;
  j["matched"] = r.matched;
  j["match_rate_pct"] = num(r.match_rate);
  j["mean_rmse"] = num(r.mean_rmse);
  j["items"] = nlohmann::json::array();
  for (const auto& it : r.items)
    j["items"].push_back({{"id", it.id}, {"matched", it.matched}, {"rmse", num(it.rmse)}});
  return j;
}

inline nlohmann::json calibration_json(const Thresholds& t) {
  nlohmann::json j = header("calibrate-thresholds");
  j["thresholds"] = thresholds_json(t, true);
  return j;
}

inline nlohmann::json match_json(const MatchResult& m, const MatchOptions& opt, const std::string& a,
                                 const std::string& b) {
  nlohmann::json j = header("match");
  j["a"] = a;
  j["b"] = b;
  j["match_options"] = {{"stol", num(opt.stol)}, {"angle_tol", num(opt.angle_tol)}, {"ltol", num(opt.ltol)}};
  j["matched"] = m.matched;
  j["rmse"] = num(m.rmse_normalized);
  j["max_distance"] = num(m.max_distance_normalized);
  j["lattice_candidates"] = m.lattice_candidates;
  return j;
}

inline nlohmann::json error_json(const std::string& command, const std::string& message) {
  nlohmann::json j = header("error");
  j["command"] = command;
  j["error"] = message;
  return j;
}

// Written next to every run's outputs. No timestamps, so identical runs give
// identical manifests.
inline nlohmann::json manifest_json(const std::string& command, const RunConfig& config,
                                    const std::vector<std::string>& outputs) {
  nlohmann::json j = header("manifest");
  j["command"] = command;
  j["seed"] = config.seed;
  j["config_hash"] = config.hash();
  j["config"] = config.canonical();
  j["outputs"] = outputs;
  return j;
}

inline std::string to_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  io::write_file_atomic(path, to_text(j));
}

}  // namespace xtalgen::report
