#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "opderiv/config.hpp"
#include "opderiv/dynamics.hpp"

namespace opderiv {

/// IEEE double with 17 significant digits, '.' decimal separator regardless
/// of locale (CSV contract).
inline std::string format_double(double x) {
  char buf[64];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", x);
  std::string s(buf, static_cast<std::size_t>(len));
  for (char& c : s)
    if (c == ',') c = '.';
  return s;
}

inline nlohmann::json to_json(const BoundednessVerdict& v) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& [n, norm] : v.curve) curve.push_back({n, norm});
  return {{"verdict", to_string(v.status)},
          {"norm_estimate", v.norm_estimate},
          {"growth_exponent", v.growth_exponent},
          {"curve", std::move(curve)},
          {"leakage", v.leakage}};
}

inline nlohmann::json to_json(const LipschitzReport& r) {
  return {{"t", r.t_grid},
          {"ratio", r.ratios},
          {"sup_ratio", r.sup_ratio},
          {"limit_estimate", r.limit_estimate},
          {"valid_floor", r.valid_floor}};
}

inline nlohmann::json to_json(const ContinuityModulus& c) {
  return {{"delta", c.delta}, {"omega", c.omega}};
}

inline nlohmann::json to_json(const DerivativeChain& chain) {
  nlohmann::json orders = nlohmann::json::array();
  for (const auto& term : chain.terms) orders.push_back(to_json(term.verdict));
  return {{"order_requested", chain.order_requested}, {"orders", std::move(orders)}};
}

inline nlohmann::json to_json(const DiffReport& rep) {
  nlohmann::json j{{"schema", kSchemaTag},
                   {"classification", to_string(rep.classification)},
                   {"weak", to_json(rep.weak)},
                   {"lipschitz", to_json(rep.lipschitz)},
                   {"wd_norm", rep.wd_norm},
                   {"a_norm", rep.a_norm},
                   {"lipschitz_agrees", rep.lipschitz_agrees}};
  if (rep.continuity) j["continuity"] = to_json(*rep.continuity);
  if (rep.chain) j["chain"] = to_json(*rep.chain);
  return j;
}

/// Structural validation against the published opderiv/1 report shape.
inline bool validate_report_json(const nlohmann::json& j, std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (!j.is_object()) return fail("report is not an object");
  if (!j.contains("schema") || j["schema"] != kSchemaTag) return fail("missing schema tag");
  if (!j.contains("classification") || !j["classification"].is_string())
    return fail("missing classification");
  const std::string cls = j["classification"].get<std::string>();
  if (cls != "Strong" && cls != "WeakOnly" && cls != "NotWeak" && cls != "Inconclusive")
    return fail("unknown classification: " + cls);
  if (!j.contains("weak") || !j["weak"].is_object()) return fail("missing weak verdict");
  const auto& weak = j["weak"];
  for (const char* key : {"verdict", "norm_estimate", "growth_exponent", "curve"})
    if (!weak.contains(key)) return fail(std::string("weak verdict missing ") + key);
  if (!weak["curve"].is_array()) return fail("weak curve is not an array");
  if (!j.contains("lipschitz") || !j["lipschitz"].is_object()) return fail("missing lipschitz");
  const auto& lip = j["lipschitz"];
  for (const char* key : {"t", "ratio", "sup_ratio", "limit_estimate", "valid_floor"})
    if (!lip.contains(key)) return fail(std::string("lipschitz missing ") + key);
  if (!lip["t"].is_array() || !lip["ratio"].is_array() ||
      lip["t"].size() != lip["ratio"].size())
    return fail("lipschitz grids are misaligned");
  if (j.contains("continuity")) {
    const auto& cont = j["continuity"];
    if (!cont.contains("delta") || !cont.contains("omega") ||
        cont["delta"].size() != cont["omega"].size())
      return fail("continuity grids are misaligned");
  }
  return true;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw ValidationError("failed writing: " + path.string());
}

inline std::string curve_csv(const std::string& xname, const std::string& yname,
                             const std::vector<double>& xs, const std::vector<double>& ys) {
  std::string csv = xname + "," + yname + "\n";
  for (std::size_t i = 0; i < xs.size(); ++i)
    csv += format_double(xs[i]) + "," + format_double(ys[i]) + "\n";
  return csv;
}

/// Bundle layout: report.json plus one CSV per emitted curve.
struct ReportBundle {
  DiffReport report;
  nlohmann::json extras;        // command-specific additions (identity checks, tables)
  AnalysisConfig config;
  std::string model_summary;
  double wall_ms = 0.0;
  bool reproducible = false;
};

inline nlohmann::json bundle_json(const ReportBundle& bundle) {
  nlohmann::json j = to_json(bundle.report);
  j["meta"] = {{"schema", kSchemaTag},
               {"version", kVersion},
               {"model", bundle.model_summary},
               {"config", bundle.config.to_json()}};
  if (!bundle.reproducible) j["meta"]["wall_ms"] = bundle.wall_ms;
  for (const auto& [key, value] : bundle.extras.items()) j[key] = value;
  return j;
}

inline void write_bundle(const std::filesystem::path& dir, const ReportBundle& bundle) {
  std::filesystem::create_directories(dir);
  const nlohmann::json j = bundle_json(bundle);
  std::string why;
  if (!validate_report_json(j, &why))
    throw NumericalError("emitted report does not validate: " + why);
  write_text_file(dir / "report.json", j.dump(2) + "\n");

  std::vector<double> ns, norms;
  for (const auto& [n, norm] : bundle.report.weak.curve) {
    ns.push_back(static_cast<double>(n));
    norms.push_back(norm);
  }
  write_text_file(dir / "truncation.csv", curve_csv("n", "norm", ns, norms));
  write_text_file(dir / "lipschitz.csv",
                  curve_csv("t", "ratio", bundle.report.lipschitz.t_grid,
                            bundle.report.lipschitz.ratios));
  if (bundle.report.continuity)
    write_text_file(dir / "continuity.csv",
                    curve_csv("delta", "omega", bundle.report.continuity->delta,
                              bundle.report.continuity->omega));
}

}  // namespace opderiv
