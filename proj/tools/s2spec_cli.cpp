// s2spec command line front end: evaluate quantization conditions, sample
// curves for plotting, locate zeros, run halo fits and spectrum predictions.
//
// Exit codes: 0 success, 2 usage/schema/version mismatch, 3 pole error,
// 4 fit failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "s2spec/analogs.hpp"
#include "s2spec/errors.hpp"
#include "s2spec/halo.hpp"
#include "s2spec/quantization.hpp"
#include "s2spec/version.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitPole = 3;
constexpr int kExitFit = 4;

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

// All payloads go through a temp file and rename so readers never observe a
// partial write.
void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

void write_manifest(const std::string& command, const json& inputs,
                    std::uint64_t seed, const std::string& data_version,
                    const std::vector<std::string>& outputs,
                    const std::string& manifest_path) {
  json m;
  m["command"] = command;
  m["inputs"] = inputs;
  m["seed"] = seed;
  m["versions"] = {{"artifact", s2spec::kVersion}, {"data", data_version}};
  m["outputs"] = outputs;
  write_atomic(manifest_path, m.dump(2) + "\n");
}

std::string default_manifest_path(const std::string& out_path) {
  return out_path + ".manifest.json";
}

// Bare system names resolve against S2SPEC_DATA_DIR (or the shipped data
// directory), so `--system he6` finds data/he6.json.
std::string resolve_system_path(const std::string& arg) {
  namespace fs = std::filesystem;
  if (fs::exists(arg) || arg.find('/') != std::string::npos) return arg;
  const char* env = std::getenv("S2SPEC_DATA_DIR");
  const std::string dir = env != nullptr ? env : std::string(S2SPEC_DEFAULT_DATA_DIR);
  for (const std::string& cand : {dir + "/" + arg, dir + "/" + arg + ".json"})
    if (fs::exists(cand)) return cand;
  return arg;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  int band = -1;
  std::string geometry;
  double x = 0.0;
  double torus_cutoff = 200.0;
  std::string out;
};

double eval_condition(const EvalArgs& a) {
  if (!a.geometry.empty()) {
    if (a.geometry == "ho") return s2spec::ho_condition(a.x);
    if (a.geometry == "torus")
      return s2spec::torus_s2(a.x, {a.torus_cutoff, true});
    throw CLI::ValidationError("--geometry must be ho or torus");
  }
  if (a.band < 0) throw CLI::ValidationError("need --band or --geometry");
  return a.band <= 2 ? s2spec::z_closed(a.band, a.x)
                     : s2spec::z_general(a.band, a.x);
}

int run_eval(const EvalArgs& a) {
  const double v = eval_condition(a);
  const std::string text = format_value(v) + "\n";
  std::fputs(text.c_str(), stdout);
  if (!a.out.empty()) {
    write_atomic(a.out, text);
    json inputs = {{"band", a.band},      {"geometry", a.geometry},
                   {"x", a.x},            {"torus_cutoff", a.torus_cutoff},
                   {"out", a.out}};
    write_manifest("eval", inputs, 0, "", {a.out}, default_manifest_path(a.out));
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// zeros

struct ZerosArgs {
  int band = 0;
  int count = 4;
  std::string out;
};

int run_zeros(const ZerosArgs& a) {
  const auto zs = s2spec::band_zeros(a.band, a.count);
  std::string text;
  for (const double z : zs) text += format_value(z) + "\n";
  std::fputs(text.c_str(), stdout);
  if (!a.out.empty()) {
    write_atomic(a.out, text);
    json inputs = {{"band", a.band}, {"count", a.count}, {"out", a.out}};
    write_manifest("zeros", inputs, 0, "", {a.out}, default_manifest_path(a.out));
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// curve

struct CurveArgs {
  int band = -1;
  std::string geometry;
  double xmin = -9.0;
  double xmax = 40.0;
  int points = 2000;
  double torus_cutoff = 200.0;
  std::string out;
};

std::vector<double> curve_poles(const CurveArgs& a) {
  std::vector<double> ps;
  if (!a.geometry.empty()) {
    if (a.geometry == "ho") {
      for (double p = 1.0; p <= a.xmax + 1.0; p += 2.0) ps.push_back(p);
    } else {
      ps = s2spec::torus_poles(static_cast<int>(std::max(8.0, a.xmax + 8.0)));
    }
  } else {
    int count = 8;
    ps = s2spec::poles(a.band, count);
    while (ps.back() < a.xmax && count < 4096) {
      count *= 2;
      ps = s2spec::poles(a.band, count);
    }
  }
  return ps;
}

int run_curve(const CurveArgs& a) {
  if (a.points < 2) throw CLI::ValidationError("--points must be at least 2");
  if (a.out.empty()) throw CLI::ValidationError("curve requires --out");
  const auto value = [&](double x) {
    if (a.geometry == "ho") return s2spec::ho_condition(x);
    if (a.geometry == "torus") return s2spec::torus_s2(x, {a.torus_cutoff, false});
    return a.band <= 2 ? s2spec::z_closed(a.band, x)
                       : s2spec::z_general(a.band, x);
  };
  if (a.geometry.empty() && a.band < 0)
    throw CLI::ValidationError("need --band or --geometry");

  const auto ps = curve_poles(a);
  std::string csv = "# s2spec " + std::string(s2spec::kVersion) + " curve " +
                    (a.geometry.empty() ? "band=" + std::to_string(a.band)
                                        : "geometry=" + a.geometry) +
                    " xmin=" + format_value(a.xmin) +
                    " xmax=" + format_value(a.xmax) +
                    " points=" + std::to_string(a.points) + "\n";
  csv += "x,value,segment\n";
  const double guard = 1e-9 * std::max(1.0, std::fabs(a.xmax));
  for (int i = 0; i < a.points; ++i) {
    const double x = a.xmin + (a.xmax - a.xmin) * i / (a.points - 1.0);
    int segment = 0;
    bool at_pole = false;
    for (const double p : ps) {
      if (std::fabs(x - p) < guard) at_pole = true;
      if (p < x) ++segment;
    }
    if (at_pole) continue; // poles are gap markers between segments
    double v;
    try {
      v = value(x);
    } catch (const s2spec::pole_error&) {
      continue;
    }
    csv += format_value(x) + "," + format_value(v) + "," +
           std::to_string(segment) + "\n";
  }
  write_atomic(a.out, csv);
  json inputs = {{"band", a.band},   {"geometry", a.geometry},
                 {"xmin", a.xmin},   {"xmax", a.xmax},
                 {"points", a.points}, {"torus_cutoff", a.torus_cutoff},
                 {"out", a.out}};
  write_manifest("curve", inputs, 0, "", {a.out}, default_manifest_path(a.out));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitCmdArgs {
  std::string system;
  long samples = 10000;
  std::uint64_t seed = 1;
  std::string out;
};

json fit_result_json(const s2spec::FitResult& r) {
  return {{"a_fm", r.a},           {"a_sigma_fm", r.a_sigma},
          {"r_fm", r.r},           {"r_sigma_fm", r.r_sigma},
          {"atilde", r.atilde},    {"atilde_sigma", r.atilde_sigma},
          {"samples", r.samples},  {"seed", r.seed},
          {"failure_fraction", r.failure_fraction}};
}

json system_fit_json(const s2spec::HaloSystem& sys, const s2spec::SystemFit& fit) {
  json channels = json::array();
  for (std::size_t c = 0; c < fit.channels.size(); ++c) {
    const auto& cr = fit.channels[c];
    channels.push_back(
        {{"S", sys.channels[c].s},
         {"T", sys.channels[c].t},
         {"central",
          {{"r_fm", cr.central.r},
           {"a_fm", cr.central.a},
           {"atilde", cr.central.atilde},
           {"log_a_over_r", cr.central.log_a_over_r}}},
         {"mc", fit_result_json(cr.mc)}});
  }
  return {{"command", "fit"},
          {"artifact_version", s2spec::kVersion},
          {"system", {{"name", fit.system_name}, {"version", fit.system_version}}},
          {"samples", fit.samples},
          {"seed", fit.seed},
          {"failure_fraction", fit.failure_fraction},
          {"channels", channels}};
}

int run_fit(FitCmdArgs a) {
  if (a.out.empty()) throw CLI::ValidationError("fit requires --out");
  a.system = resolve_system_path(a.system);
  const s2spec::HaloSystem sys = s2spec::load_system(a.system);
  const s2spec::SystemFit fit = s2spec::fit_system(sys, a.samples, a.seed);
  write_atomic(a.out, system_fit_json(sys, fit).dump(2) + "\n");
  json inputs = {{"system", a.system},
                 {"samples", a.samples},
                 {"seed", a.seed},
                 {"out", a.out}};
  write_manifest("fit", inputs, a.seed, sys.version, {a.out},
                 default_manifest_path(a.out));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string system;
  std::string fit;
  int l_max = 2;
  int levels_per_band = 4;
  std::string out;
};

int run_predict(PredictArgs a) {
  if (a.out.empty()) throw CLI::ValidationError("predict requires --out");
  a.system = resolve_system_path(a.system);
  const s2spec::HaloSystem sys = s2spec::load_system(a.system);

  json jf;
  {
    std::ifstream in(a.fit);
    if (!in) throw s2spec::schema_error("cannot open fit report: " + a.fit);
    try {
      in >> jf;
    } catch (const json::exception& e) {
      throw s2spec::schema_error("invalid fit report JSON: " + std::string(e.what()));
    }
  }
  s2spec::SystemFit fit;
  try {
    fit.system_name = jf.at("system").at("name").get<std::string>();
    fit.system_version = jf.at("system").at("version").get<std::string>();
    fit.samples = jf.at("samples").get<long>();
    fit.seed = jf.at("seed").get<std::uint64_t>();
    fit.failure_fraction = jf.at("failure_fraction").get<double>();
    for (const auto& jc : jf.at("channels")) {
      s2spec::ChannelResult cr;
      cr.central.r = jc.at("central").at("r_fm").get<double>();
      cr.central.a = jc.at("central").at("a_fm").get<double>();
      cr.central.atilde = jc.at("central").at("atilde").get<double>();
      cr.central.log_a_over_r = jc.at("central").at("log_a_over_r").get<double>();
      fit.channels.push_back(cr);
    }
  } catch (const json::exception& e) {
    throw s2spec::schema_error("fit report does not match schema: " +
                               std::string(e.what()));
  }
  if (fit.system_name != sys.name || fit.system_version != sys.version)
    throw s2spec::schema_error("fit report was produced for system '" +
                               fit.system_name + "' version '" +
                               fit.system_version + "', not '" + sys.name +
                               "' version '" + sys.version + "'");

  const auto levels = s2spec::predict_spectrum(sys, fit, a.l_max, a.levels_per_band);
  json jl = json::array();
  for (const auto& lv : levels) {
    jl.push_back({{"channel", lv.channel},
                  {"S", sys.channels[lv.channel].s},
                  {"T", sys.channels[lv.channel].t},
                  {"L", lv.L},
                  {"branch", lv.branch},
                  {"parity", lv.parity},
                  {"x", lv.x},
                  {"energy_mev", lv.energy_mev},
                  {"sigma_mev", lv.sigma_mev},
                  {"two_j", lv.two_j_values},
                  {"label", lv.label}});
  }
  const json report = {{"command", "predict"},
                       {"artifact_version", s2spec::kVersion},
                       {"system", {{"name", sys.name}, {"version", sys.version}}},
                       {"samples", fit.samples},
                       {"seed", fit.seed},
                       {"l_max", a.l_max},
                       {"levels_per_band", a.levels_per_band},
                       {"levels", jl}};
  write_atomic(a.out, report.dump(2) + "\n");
  json inputs = {{"system", a.system},
                 {"fit", a.fit},
                 {"l_max", a.l_max},
                 {"levels_per_band", a.levels_per_band},
                 {"out", a.out}};
  write_manifest("predict", inputs, fit.seed, sys.version, {a.out},
                 default_manifest_path(a.out));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// replay

int run_replay(const std::string& manifest_path) {
  json m;
  {
    std::ifstream in(manifest_path);
    if (!in) throw s2spec::schema_error("cannot open manifest: " + manifest_path);
    try {
      in >> m;
    } catch (const json::exception& e) {
      throw s2spec::schema_error("invalid manifest JSON: " + std::string(e.what()));
    }
  }
  try {
    const std::string command = m.at("command").get<std::string>();
    const json& in = m.at("inputs");
    if (command == "eval") {
      EvalArgs a;
      a.band = in.at("band").get<int>();
      a.geometry = in.at("geometry").get<std::string>();
      a.x = in.at("x").get<double>();
      a.torus_cutoff = in.at("torus_cutoff").get<double>();
      a.out = in.at("out").get<std::string>();
      return run_eval(a);
    }
    if (command == "zeros") {
      ZerosArgs a;
      a.band = in.at("band").get<int>();
      a.count = in.at("count").get<int>();
      a.out = in.at("out").get<std::string>();
      return run_zeros(a);
    }
    if (command == "curve") {
      CurveArgs a;
      a.band = in.at("band").get<int>();
      a.geometry = in.at("geometry").get<std::string>();
      a.xmin = in.at("xmin").get<double>();
      a.xmax = in.at("xmax").get<double>();
      a.points = in.at("points").get<int>();
      a.torus_cutoff = in.at("torus_cutoff").get<double>();
      a.out = in.at("out").get<std::string>();
      return run_curve(a);
    }
    if (command == "fit") {
      FitCmdArgs a;
      a.system = in.at("system").get<std::string>();
      a.samples = in.at("samples").get<long>();
      a.seed = in.at("seed").get<std::uint64_t>();
      a.out = in.at("out").get<std::string>();
      return run_fit(a);
    }
    if (command == "predict") {
      PredictArgs a;
      a.system = in.at("system").get<std::string>();
      a.fit = in.at("fit").get<std::string>();
      a.l_max = in.at("l_max").get<int>();
      a.levels_per_band = in.at("levels_per_band").get<int>();
      a.out = in.at("out").get<std::string>();
      return run_predict(a);
    }
    throw s2spec::schema_error("manifest has unknown command: " + command);
  } catch (const json::exception& e) {
    throw s2spec::schema_error("manifest does not match schema: " +
                               std::string(e.what()));
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrum of two contact-interacting particles on a sphere"};
  app.require_subcommand(1);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Evaluate a quantization condition");
  eval->add_option("--band", eval_args.band, "Rotational band L on the sphere");
  eval->add_option("--geometry", eval_args.geometry, "Analog geometry: ho | torus");
  eval->add_option("--x", eval_args.x, "Dimensionless energy")->required();
  eval->add_option("--torus-cutoff", eval_args.torus_cutoff,
                   "Base lattice cutoff for the torus ladder");
  eval->add_option("--out", eval_args.out, "Also write the value to a file");

  ZerosArgs zeros_args;
  auto* zeros = app.add_subcommand("zeros", "Zeros of a band condition");
  zeros->add_option("--band", zeros_args.band, "Rotational band L")->required();
  zeros->add_option("--count", zeros_args.count, "Number of zeros");
  zeros->add_option("--out", zeros_args.out, "Also write the zeros to a file");

  CurveArgs curve_args;
  auto* curve = app.add_subcommand("curve", "Sample a condition into CSV");
  curve->add_option("--band", curve_args.band, "Rotational band L");
  curve->add_option("--geometry", curve_args.geometry, "ho | torus");
  curve->add_option("--xmin", curve_args.xmin, "Range start")->required();
  curve->add_option("--xmax", curve_args.xmax, "Range end")->required();
  curve->add_option("--points", curve_args.points, "Grid points");
  curve->add_option("--torus-cutoff", curve_args.torus_cutoff,
                    "Lattice cutoff for the torus curve");
  curve->add_option("--out", curve_args.out, "Output CSV path")->required();

  FitCmdArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit halo parameters with MC errors");
  fit->add_option("--system", fit_args.system, "Halo system JSON file")->required();
  fit->add_option("--samples", fit_args.samples, "MC sample count");
  fit->add_option("--seed", fit_args.seed, "MC seed");
  fit->add_option("--out", fit_args.out, "Output report path")->required();

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "Predict the halo spectrum");
  predict->add_option("--system", predict_args.system, "Halo system JSON file")
      ->required();
  predict->add_option("--fit", predict_args.fit, "Fit report from `fit`")->required();
  predict->add_option("--lmax", predict_args.l_max, "Largest band L");
  predict->add_option("--levels", predict_args.levels_per_band, "Branches per band");
  predict->add_option("--out", predict_args.out, "Output report path")->required();

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "Re-run a recorded manifest");
  replay->add_option("--manifest", manifest_path, "Manifest file")->required();

  try {
    app.parse(argc, argv);
    if (eval->parsed()) return run_eval(eval_args);
    if (zeros->parsed()) return run_zeros(zeros_args);
    if (curve->parsed()) return run_curve(curve_args);
    if (fit->parsed()) return run_fit(fit_args);
    if (predict->parsed()) return run_predict(predict_args);
    if (replay->parsed()) return run_replay(manifest_path);
    return kExitUsage;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const s2spec::pole_error& e) {
    std::fprintf(stderr, "pole error: %s\n", e.what());
    return kExitPole;
  } catch (const s2spec::schema_error& e) {
    std::fprintf(stderr, "schema error: %s\n", e.what());
    return kExitUsage;
  } catch (const s2spec::selection_rule_error& e) {
    std::fprintf(stderr, "selection rule error: %s\n", e.what());
    return kExitUsage;
  } catch (const s2spec::fit_error& e) {
    std::fprintf(stderr, "fit error: %s\n", e.what());
    return kExitFit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
