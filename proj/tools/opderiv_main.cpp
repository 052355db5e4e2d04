// opderiv command line: ingest operator models, run the weak/strong
// differentiability analysis, and emit report bundles (JSON + CSV curves).
//
// Subcommands:
//   analyze     --D <file> --a <file> [--order k] [--config f] --out <dir>
//   classify    analyze, summary line only
//   torus-demo  --model absx|sign|antideriv|powerlaw --bandlimit L --out <dir>
//   sweep       --model <...> --bandlimits 64,128,256,512 --out <dir>
//
// Exit codes: 0 ok, 2 malformed input, 3 numerical failure, 4 Inconclusive
// under --strict.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "opderiv/opderiv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw opderiv::ValidationError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw opderiv::ValidationError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

opderiv::Observable load_observable(const std::string& path) {
  const json j = load_json(path);
  if (!j.is_object() || !j.contains("type"))
    throw opderiv::ValidationError("operand JSON needs a \"type\" field: " + path);
  const std::string type = j["type"].get<std::string>();
  if (type == "table" || type == "builtin") return opderiv::fourier_from_json(j);
  if (type == "matrix") {
    if (!j.contains("dim") || !j.contains("entries"))
      throw opderiv::ValidationError("matrix operand needs \"dim\" and \"entries\"");
    return opderiv::matrix_from_json_entries(j["entries"], j["dim"].get<opderiv::Index>());
  }
  // any self-adjoint model file is also a valid operand
  return opderiv::SelfAdjointModel::from_json(j).to_dense();
}

std::string model_summary(const opderiv::SelfAdjointModel& d) {
  std::ostringstream os;
  switch (d.kind()) {
    case opderiv::ModelKind::DenseHermitian: os << "hermitian dim " << d.dim(); break;
    case opderiv::ModelKind::Diagonal: os << "diagonal dim " << d.dim(); break;
    case opderiv::ModelKind::Circle: os << "circle bandlimit " << d.bandlimit(); break;
    case opderiv::ModelKind::CircleAbs: os << "circle-abs bandlimit " << d.bandlimit(); break;
  }
  return os.str();
}

void print_summary(const opderiv::DiffReport& rep) {
  std::cout << to_string(rep.classification) << " | ‖wD(a)‖≈"
            << opderiv::format_double(rep.wd_norm) << " | Lip≈"
            << opderiv::format_double(rep.lipschitz.sup_ratio) << "\n";
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  bool strict = false;
  bool reproducible = false;
  bool summary_only = false;
  int order = 0;  // 0: keep config value
};

opderiv::AnalysisConfig load_config(const CommonFlags& flags) {
  opderiv::AnalysisConfig cfg;
  if (!flags.config_path.empty())
    cfg = opderiv::AnalysisConfig::from_json(load_json(flags.config_path));
  if (flags.order > 0) cfg.order = flags.order;
  cfg.validate();
  return cfg;
}

int finish(const opderiv::DiffReport& rep, const opderiv::ReportBundle& bundle,
           const CommonFlags& flags) {
  if (!flags.summary_only) {
    if (flags.out_dir.empty()) throw opderiv::ValidationError("--out is required");
    opderiv::write_bundle(flags.out_dir, bundle);
  }
  print_summary(rep);
  if (flags.strict && rep.classification == opderiv::Classification::Inconclusive) return 4;
  return 0;
}

int run_analyze(const std::string& d_path, const std::string& a_path, const CommonFlags& flags) {
  const auto cfg = load_config(flags);
  const auto model = opderiv::SelfAdjointModel::from_json(load_json(d_path));
  const auto operand = load_observable(a_path);
  const auto start = std::chrono::steady_clock::now();
  opderiv::ReportBundle bundle;
  bundle.report = opderiv::classify(model, operand, cfg);
  bundle.config = cfg;
  bundle.model_summary = model_summary(model);
  bundle.reproducible = flags.reproducible;
  bundle.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return finish(bundle.report, bundle, flags);
}

opderiv::FourierFunction demo_function(const std::string& name) {
  return opderiv::fourier_builtin(name);
}

int run_torus_demo(const std::string& model_name, int bandlimit, const CommonFlags& flags) {
  const auto cfg_base = load_config(flags);
  opderiv::AnalysisConfig cfg = cfg_base;
  if (model_name == "antideriv" && cfg.order < 2) cfg.order = 2;
  const auto D = opderiv::torus_D(bandlimit);
  const auto f = demo_function(model_name);
  const auto start = std::chrono::steady_clock::now();

  opderiv::ReportBundle bundle;
  bundle.report = opderiv::classify(D, f, cfg);
  bundle.config = cfg;
  bundle.model_summary = model_summary(D) + " / " + f.name;
  bundle.reproducible = flags.reproducible;

  // demo extras: the model operator's own continuity curve, the coefficient
  // table, the summability diagnostic, and (absx) the exact-identity check
  auto bd = std::make_shared<const opderiv::BandDecomposition>(opderiv::band_decompose(D));
  const auto m_f = opderiv::embed_observable(f, bd);
  const auto model_cont =
      opderiv::continuity_modulus(m_f, bd->full_window(), cfg.time_grid(D), cfg);
  bundle.extras["model_continuity"] = opderiv::to_json(model_cont);
  bundle.extras["coefficients"] = opderiv::fourier_to_json(f, bandlimit);
  bundle.extras["symbol_summability"] = opderiv::to_json(opderiv::coefficient_summability(f));
  if (model_name == "absx")
    bundle.extras["identity_check"] = opderiv::absx_sign_identity_defect(bandlimit);
  bundle.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  const int rc = finish(bundle.report, bundle, flags);
  if (rc == 0 && !flags.summary_only && !flags.out_dir.empty()) {
    std::string csv = "n,re,im\n";
    for (long n = -bandlimit; n <= bandlimit; ++n) {
      const auto c = f(n);
      csv += std::to_string(n) + "," + opderiv::format_double(c.real()) + "," +
             opderiv::format_double(c.imag()) + "\n";
    }
    opderiv::write_text_file(fs::path(flags.out_dir) / "coeffs.csv", csv);
  }
  return rc;
}

int run_sweep(const std::string& model_name, const std::vector<int>& bandlimits,
              const CommonFlags& flags) {
  if (bandlimits.empty()) throw opderiv::ValidationError("--bandlimits must be nonempty");
  if (flags.out_dir.empty()) throw opderiv::ValidationError("--out is required");
  const auto cfg_base = load_config(flags);
  std::string summary =
      "bandlimit,classification,weak_verdict,norm_estimate,growth_exponent,lip_sup,lip_floor,"
      "omega_min\n";
  int worst = 0;
  for (int L : bandlimits) {
    if (L < 1) throw opderiv::ValidationError("bandlimits must be >= 1");
    CommonFlags sub = flags;
    sub.out_dir = (fs::path(flags.out_dir) / ("L" + std::to_string(L))).string();
    sub.summary_only = false;
    const auto D = opderiv::torus_D(L);
    const auto f = demo_function(model_name);
    opderiv::AnalysisConfig cfg = cfg_base;
    const auto start = std::chrono::steady_clock::now();
    opderiv::ReportBundle bundle;
    bundle.report = opderiv::classify(D, f, cfg);
    bundle.config = cfg;
    bundle.model_summary = model_summary(D) + " / " + f.name;
    bundle.reproducible = flags.reproducible;
    bundle.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                               start)
                         .count();
    opderiv::write_bundle(sub.out_dir, bundle);
    const auto& rep = bundle.report;
    const double omega_min =
        rep.continuity ? opderiv::omega_at_floor(*rep.continuity) : 0.0;
    summary += std::to_string(L) + "," + to_string(rep.classification) + "," +
               to_string(rep.weak.status) + "," + opderiv::format_double(rep.weak.norm_estimate) +
               "," + opderiv::format_double(rep.weak.growth_exponent) + "," +
               opderiv::format_double(rep.lipschitz.sup_ratio) + "," +
               opderiv::format_double(rep.lipschitz.limit_estimate) + "," +
               opderiv::format_double(omega_min) + "\n";
    std::cout << "L=" << L << ": ";
    print_summary(rep);
    if (flags.strict && rep.classification == opderiv::Classification::Inconclusive) worst = 4;
  }
  opderiv::write_text_file(fs::path(flags.out_dir) / "summary.csv", summary);
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"block-matrix commutator calculus for self-adjoint operators"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string d_path, a_path, model_name;
  int bandlimit = 512;
  std::vector<int> bandlimits;

  auto add_common = [&flags](CLI::App* cmd, bool with_out = true) {
    cmd->add_option("--config", flags.config_path, "analysis config JSON");
    if (with_out) cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_flag("--strict", flags.strict, "exit 4 on Inconclusive");
    cmd->add_flag("--reproducible", flags.reproducible, "omit timing metadata");
    cmd->add_option("--order", flags.order, "derivative chain order");
  };

  auto* analyze = app.add_subcommand("analyze", "classify a (D, a) pair");
  analyze->add_option("--D", d_path, "self-adjoint model JSON")->required();
  analyze->add_option("--a", a_path, "operand JSON (matrix or fourier)")->required();
  analyze->add_flag("--summary-only", flags.summary_only, "print the summary line only");
  add_common(analyze);

  auto* classify_cmd = app.add_subcommand("classify", "analyze, summary line only");
  classify_cmd->add_option("--D", d_path, "self-adjoint model JSON")->required();
  classify_cmd->add_option("--a", a_path, "operand JSON (matrix or fourier)")->required();
  add_common(classify_cmd, false);

  auto* demo = app.add_subcommand("torus-demo", "run a circle-example model");
  demo->add_option("--model", model_name, "absx|sign|antideriv|powerlaw")->required();
  demo->add_option("--bandlimit", bandlimit, "circle bandlimit L")->required();
  demo->add_flag("--summary-only", flags.summary_only, "print the summary line only");
  add_common(demo);

  auto* sweep = app.add_subcommand("sweep", "torus model across bandlimits");
  sweep->add_option("--model", model_name, "absx|sign|antideriv|powerlaw")->required();
  sweep->add_option("--bandlimits", bandlimits, "comma-separated bandlimits")
      ->required()
      ->delimiter(',');
  add_common(sweep);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(analyze)) return run_analyze(d_path, a_path, flags);
    if (app.got_subcommand(classify_cmd)) {
      flags.summary_only = true;
      return run_analyze(d_path, a_path, flags);
    }
    if (app.got_subcommand(demo)) return run_torus_demo(model_name, bandlimit, flags);
    if (app.got_subcommand(sweep)) return run_sweep(model_name, bandlimits, flags);
  } catch (const opderiv::ValidationError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const opderiv::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
