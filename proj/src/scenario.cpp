#include "cpqbm/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cpqbm/gaussian.hpp"
#include "cpqbm/linalg.hpp"

namespace cpqbm {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size() && std::isfinite(out);
  } catch (...) {
    return false;
  }
}

bool parse_int(const std::string& s, int& out) {
  try {
    std::size_t pos = 0;
    out = std::stoi(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

// Raw key/value block of one scenario, with source lines for error reports.
struct RawScenario {
  int name_line = 0;
  std::string name;
  std::map<std::string, std::pair<int, std::string>> kv;  // key -> (line, value)
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "scenario.name",     "gas.m",
      "gas.beta",          "gas.n",
      "gas.hbar",          "particle.M",
      "tmatrix.model",     "tmatrix.t0",
      "tmatrix.sigma",     "tmatrix.file",
      "tmatrix.f_re0",     "generator.form",
      "hamiltonian.kind",  "hamiltonian.omega",
      "basis.dim",         "basis.omega_ref",
      "initial.kind",      "initial.n",
      "initial.alpha_re",  "initial.alpha_im",
      "initial.beta_eff",  "integrator.mode",
      "integrator.dt",     "integrator.t_end",
      "integrator.record_every",
      "integrator.rel_tol", "integrator.abs_tol",
      "integrator.hermitize",
      "output.csv",        "output.json",
      "output.print_report", "output.choi"};
  return keys;
}

// Pulls typed values out of a RawScenario, recording an error (with the
// key's source line) whenever something is missing or malformed and falling
// back to the given default so parsing can continue.
class Extractor {
 public:
  Extractor(RawScenario& raw, std::vector<ConfigError>& errors)
      : raw_(raw), errors_(errors) {}

  bool has(const std::string& key) const { return raw_.kv.count(key) > 0; }

  int line_of(const std::string& key) const {
    const auto it = raw_.kv.find(key);
    return it == raw_.kv.end() ? raw_.name_line : it->second.first;
  }

  void error(const std::string& key, const std::string& reason) {
    errors_.push_back({line_of(key), key, reason});
  }

  std::optional<std::string> str(const std::string& key) {
    const auto it = raw_.kv.find(key);
    if (it == raw_.kv.end()) return std::nullopt;
    used_.insert(key);
    return it->second.second;
  }

  std::string str_required(const std::string& key) {
    auto v = str(key);
    if (!v) {
      errors_.push_back({raw_.name_line, key, "missing required key"});
      return "";
    }
    return *v;
  }

  double num(const std::string& key, double def) {
    const auto v = str(key);
    if (!v) return def;
    double out = 0.0;
    if (!parse_double(*v, out)) {
      error(key, "expected a finite number, got '" + *v + "'");
      return def;
    }
    return out;
  }

  double num_required(const std::string& key) {
    if (!has(key)) {
      errors_.push_back({raw_.name_line, key, "missing required key"});
      return 1.0;  // benign placeholder; the error already failed the parse
    }
    return num(key, 1.0);
  }

  double positive(const std::string& key, double def) {
    const double v = num(key, def);
    if (!(v > 0.0)) {
      error(key, "expected a positive number");
      return def;
    }
    return v;
  }

  double positive_required(const std::string& key) {
    const double v = num_required(key);
    if (!(v > 0.0)) {
      error(key, "expected a positive number");
      return 1.0;
    }
    return v;
  }

  int integer(const std::string& key, int def) {
    const auto v = str(key);
    if (!v) return def;
    int out = 0;
    if (!parse_int(*v, out)) {
      error(key, "expected an integer, got '" + *v + "'");
      return def;
    }
    return out;
  }

  bool boolean(const std::string& key, bool def) {
    const auto v = str(key);
    if (!v) return def;
    if (*v == "true" || *v == "1" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "off") return false;
    error(key, "expected true or false, got '" + *v + "'");
    return def;
  }

  std::string choice(const std::string& key, const std::string& def,
                     std::initializer_list<const char*> allowed,
                     bool required = false) {
    auto v = required ? std::optional<std::string>(str_required(key)) : str(key);
    if (!v || v->empty()) return def;
    for (const char* a : allowed)
      if (*v == a) return *v;
    std::string list;
    for (const char* a : allowed) {
      if (!list.empty()) list += ", ";
      list += a;
    }
    error(key, "allowed values: " + list);
    return def;
  }

  // Flag every supplied key that no extraction step consumed.
  void finish() {
    for (const auto& [key, lv] : raw_.kv) {
      if (used_.count(key)) continue;
      if (known_keys().count(key))
        errors_.push_back(
            {lv.first, key, "key not applicable to this scenario's settings"});
      else
        errors_.push_back({lv.first, key, "unknown key"});
    }
  }

 private:
  RawScenario& raw_;
  std::vector<ConfigError>& errors_;
  std::set<std::string> used_;
};

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

Scenario build_scenario(RawScenario& raw, const std::string& base_dir,
                        std::vector<ConfigError>& errors) {
  Extractor ex(raw, errors);
  Scenario sc;
  sc.name = raw.name;

  sc.gas.m = ex.positive_required("gas.m");
  sc.gas.beta = ex.positive_required("gas.beta");
  sc.gas.n = ex.positive_required("gas.n");
  sc.gas.hbar = ex.positive("gas.hbar", 1.0);
  sc.particle_mass = ex.positive_required("particle.M");

  const std::string model = ex.choice("tmatrix.model", "constant",
                                      {"constant", "gaussian", "tabulated"},
                                      /*required=*/true);
  if (model == "constant") {
    TMatrixConstant m;
    m.t0 = ex.num_required("tmatrix.t0");
    if (m.t0 < 0.0) ex.error("tmatrix.t0", "expected a non-negative number");
    sc.tmatrix = m;
  } else if (model == "gaussian") {
    TMatrixGaussian m;
    m.t0 = ex.num_required("tmatrix.t0");
    if (m.t0 < 0.0) ex.error("tmatrix.t0", "expected a non-negative number");
    m.sigma = ex.positive_required("tmatrix.sigma");
    sc.tmatrix = m;
  } else {
    const std::string file = ex.str_required("tmatrix.file");
    if (!file.empty()) {
      try {
        sc.tmatrix = load_tmatrix_table((fs::path(base_dir) / file).string());
      } catch (const std::exception& e) {
        ex.error("tmatrix.file", e.what());
      }
    }
  }
  sc.f_re0 = ex.num("tmatrix.f_re0", 0.0);

  const std::string form = ex.choice(
      "generator.form", "qbm4", {"qbm4", "qbm5", "caldeira_leggett"}, true);
  sc.form = form == "qbm5"              ? GeneratorForm::Qbm5
            : form == "caldeira_leggett" ? GeneratorForm::CaldeiraLeggett
                                         : GeneratorForm::Qbm4;

  const std::string ham = ex.choice("hamiltonian.kind", "free", {"free", "harmonic"});
  if (ham == "harmonic") {
    sc.hamiltonian.kind = HamiltonianSpec::Kind::Harmonic;
    sc.hamiltonian.omega = ex.positive_required("hamiltonian.omega");
  }

  sc.basis.dim = ex.integer("basis.dim", 40);
  if (sc.basis.dim < 2) ex.error("basis.dim", "expected an integer >= 2");
  sc.basis.omega_ref = ex.positive("basis.omega_ref", 1.0);
  sc.basis.mass = sc.particle_mass;
  sc.basis.hbar = sc.gas.hbar;

  const std::string init =
      ex.choice("initial.kind", "fock", {"fock", "coherent", "thermal"});
  if (init == "fock") {
    sc.initial.kind = InitialStateSpec::Kind::Fock;
    sc.initial.fock_n = ex.integer("initial.n", 0);
    if (sc.initial.fock_n < 0 || sc.initial.fock_n >= sc.basis.dim)
      ex.error("initial.n", "level outside [0, basis.dim)");
  } else if (init == "coherent") {
    sc.initial.kind = InitialStateSpec::Kind::Coherent;
    sc.initial.alpha = Complex(ex.num("initial.alpha_re", 0.0),
                               ex.num("initial.alpha_im", 0.0));
  } else {
    sc.initial.kind = InitialStateSpec::Kind::Thermal;
    sc.initial.beta_eff = ex.positive("initial.beta_eff", sc.gas.beta);
  }

  const std::string mode = ex.choice("integrator.mode", "fixed", {"fixed", "adaptive"});
  sc.integrator.mode = mode == "adaptive" ? IntegratorConfig::Mode::Adaptive
                                          : IntegratorConfig::Mode::Fixed;
  sc.integrator.dt = ex.positive("integrator.dt", 0.01);
  sc.integrator.t_end = ex.positive("integrator.t_end", 10.0);
  if (!(sc.integrator.t_end > sc.integrator.dt))
    ex.error(ex.has("integrator.t_end") ? "integrator.t_end" : "integrator.dt",
             "t_end must exceed dt");
  sc.integrator.record_every = ex.integer("integrator.record_every", 10);
  if (sc.integrator.record_every < 1)
    ex.error("integrator.record_every", "expected an integer >= 1");
  if (sc.integrator.mode == IntegratorConfig::Mode::Adaptive) {
    sc.integrator.rel_tol = ex.num("integrator.rel_tol", 1e-8);
    sc.integrator.abs_tol = ex.num("integrator.abs_tol", 1e-10);
    for (const char* key : {"integrator.rel_tol", "integrator.abs_tol"}) {
      const double v = key == std::string("integrator.rel_tol")
                           ? sc.integrator.rel_tol
                           : sc.integrator.abs_tol;
      if (!(v > 1e-14) || !(v < 1e-2))
        ex.error(key, "adaptive tolerance must lie in (1e-14, 1e-2)");
    }
  }
  const std::string herm = ex.choice("integrator.hermitize", "off", {"off", "each_step"});
  sc.integrator.hermitize = herm == "each_step"
                                ? IntegratorConfig::Hermitize::EachStep
                                : IntegratorConfig::Hermitize::Off;

  sc.outputs.csv_name = ex.str("output.csv").value_or(sc.name + ".csv");
  sc.outputs.json_name = ex.str("output.json").value_or(sc.name + ".json");
  sc.outputs.print_report = ex.boolean("output.print_report", true);
  sc.outputs.scan_choi = ex.boolean("output.choi", false);
  if (sc.outputs.scan_choi && sc.basis.dim > 8)
    ex.error("output.choi", "Choi spectrum scan needs basis.dim <= 8");

  ex.finish();
  return sc;
}

std::string form_name(GeneratorForm f) {
  switch (f) {
    case GeneratorForm::Qbm4:
      return "qbm4";
    case GeneratorForm::Qbm5:
      return "qbm5";
    case GeneratorForm::CaldeiraLeggett:
      return "caldeira_leggett";
    case GeneratorForm::Generic:
      return "generic";
  }
  return "?";
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const TrajectoryRecord& rec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,mean_x,mean_p,var_x,var_p,cov_xp,energy,purity,trace_drift,"
         "min_eig,truncation_health\n";
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    const ObservableRow& r = rec.rows[i];
    out << fmt17(rec.times[i]) << ',' << fmt17(r.mean_x) << ','
        << fmt17(r.mean_p) << ',' << fmt17(r.var_x) << ',' << fmt17(r.var_p)
        << ',' << fmt17(r.cov_xp) << ',' << fmt17(r.energy) << ','
        << fmt17(r.purity) << ',' << fmt17(r.trace_drift) << ','
        << fmt17(r.min_eig) << ',' << fmt17(r.truncation_health) << '\n';
  }
  if (!out) throw std::runtime_error("failed while writing " + path);
}

const char* brownian_name(BrownianStatus s) {
  switch (s) {
    case BrownianStatus::Ok:
      return "ok";
    case BrownianStatus::Warn:
      return "warn";
    case BrownianStatus::Fail:
      return "fail";
  }
  return "?";
}

struct OracleDeviation {
  double mean_x = 0, mean_p = 0, var_x = 0, var_p = 0, cov_xp = 0;
  double max() const {
    return std::max({mean_x, mean_p, var_x, var_p, cov_xp});
  }
};

// Relative deviations use natural scales so that moments crossing zero do
// not blow the ratio up: means are scaled by max(|mean|, sqrt(var)), the
// covariance by max(|cov|, sqrt(var_x var_p)), variances by their own peak.
OracleDeviation oracle_deviation(const TrajectoryRecord& rec,
                                 const std::vector<GaussianState>& orc) {
  double mx = 0, mp = 0, vx = 0, vp = 0, cv = 0;
  double s_mx = 0, s_mp = 0, s_vx = 0, s_vp = 0, s_cv = 0;
  for (std::size_t i = 0; i < orc.size(); ++i) {
    const GaussianState& g = orc[i];
    s_mx = std::max(s_mx, std::abs(g.mean_x));
    s_mp = std::max(s_mp, std::abs(g.mean_p));
    s_vx = std::max(s_vx, std::abs(g.var_x));
    s_vp = std::max(s_vp, std::abs(g.var_p));
    s_cv = std::max(s_cv, std::abs(g.cov_xp));
    const ObservableRow& r = rec.rows[i];
    mx = std::max(mx, std::abs(r.mean_x - g.mean_x));
    mp = std::max(mp, std::abs(r.mean_p - g.mean_p));
    vx = std::max(vx, std::abs(r.var_x - g.var_x));
    vp = std::max(vp, std::abs(r.var_p - g.var_p));
    cv = std::max(cv, std::abs(r.cov_xp - g.cov_xp));
  }
  OracleDeviation d;
  d.mean_x = mx / std::max(s_mx, std::sqrt(s_vx));
  d.mean_p = mp / std::max(s_mp, std::sqrt(s_vp));
  d.var_x = vx / s_vx;
  d.var_p = vp / s_vp;
  d.cov_xp = cv / std::max(s_cv, std::sqrt(s_vx * s_vp));
  return d;
}

json outcome_json(const RunOutcome& out, const Scenario& sc, bool have_coeffs,
                  const std::optional<OracleDeviation>& dev) {
  json j;
  j["name"] = out.name;
  j["status"] = out.status;
  j["exit_code"] = out.exit_code;
  j["form"] = form_name(sc.form);
  if (!out.message.empty()) j["message"] = out.message;
  j["warnings"] = out.warnings;
  j["brownian"] = {{"alpha", out.brownian.alpha},
                   {"status", brownian_name(out.brownian.status)}};
  if (have_coeffs) {
    const CoefficientSet& c = out.coefficients;
    j["coefficients"] = {
        {"D_pp", c.d_pp},
        {"D_qq", c.d_qq},
        {"gamma", c.gamma},
        {"V_shift", c.v_shift},
        {"alpha", c.alpha},
        {"hbar", c.hbar},
        {"lambda_gas", thermal_wavelength_gas(sc.gas)},
        {"lambda_particle",
         thermal_wavelength_particle(sc.particle_mass, sc.gas.beta, sc.gas.hbar)}};
    j["cp"] = {{"lhs", out.cp_report.lhs},
               {"rhs", out.cp_report.rhs},
               {"slack", out.cp_report.slack},
               {"verdict", to_string(out.cp_report.verdict)}};
    if (out.cp_report.choi_min_eig) {
      j["cp"]["choi_min_eig"] = *out.cp_report.choi_min_eig;
      j["cp"]["choi_dim"] = *out.cp_report.choi_dim;
    }
  }
  j["grid"] = {{"dt", sc.integrator.dt},
               {"t_end", sc.integrator.t_end},
               {"mode", sc.integrator.mode == IntegratorConfig::Mode::Adaptive
                            ? "adaptive"
                            : "fixed"},
               {"record_every", sc.integrator.record_every}};
  if (out.trajectory) {
    j["grid"]["points"] = out.trajectory->times.size();
    j["steps"] = {{"accepted", out.trajectory->steps_accepted},
                  {"rejected", out.trajectory->steps_rejected}};
  }
  if (dev) {
    j["oracle_rel_dev"] = {{"mean_x", dev->mean_x}, {"mean_p", dev->mean_p},
                           {"var_x", dev->var_x},   {"var_p", dev->var_p},
                           {"cov_xp", dev->cov_xp}, {"max", dev->max()}};
    j["oracle_max_rel_dev"] = dev->max();
  }
  if (out.min_eig_overall) j["min_eig_overall"] = *out.min_eig_overall;
  if (out.trace_drift_max) j["trace_drift_max"] = *out.trace_drift_max;
  if (out.stationary && out.trajectory) {
    const StationaryResult& st = *out.stationary;
    json eq;
    if (st.var_p) {
      const double fin = out.trajectory->rows.back().var_p;
      eq["var_p_theory"] = *st.var_p;
      eq["var_p_final"] = fin;
      eq["var_p_rel_dev"] = std::abs(fin - *st.var_p) / *st.var_p;
    }
    if (st.var_x) eq["var_x_theory"] = *st.var_x;
    if (st.cov_xp) eq["cov_xp_theory"] = *st.cov_xp;
    j["equilibrium"] = eq;
  }
  if (!out.csv_path.empty()) j["csv"] = out.csv_path;
  j["wall_time_s"] = out.wall_time_s;
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

ParseResult parse_config(const std::string& text, const std::string& base_dir) {
  ParseResult res;
  std::vector<RawScenario> raws;
  std::set<std::string> names;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      res.errors.push_back({lineno, "", "expected 'key = value'"});
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      res.errors.push_back({lineno, "", "empty key"});
      continue;
    }
    if (key == "scenario.name") {
      if (!valid_name(value)) {
        res.errors.push_back(
            {lineno, key, "scenario names use [A-Za-z0-9_.-] and are non-empty"});
      } else if (!names.insert(value).second) {
        res.errors.push_back({lineno, key, "duplicate scenario name '" + value + "'"});
      }
      raws.push_back(RawScenario{lineno, value, {}});
      continue;
    }
    if (raws.empty()) {
      res.errors.push_back(
          {lineno, key, "key appears before the first scenario.name"});
      continue;
    }
    if (!raws.back().kv.emplace(key, std::make_pair(lineno, value)).second)
      res.errors.push_back({lineno, key, "duplicate key within this scenario"});
  }

  for (auto& raw : raws)
    res.scenarios.push_back(build_scenario(raw, base_dir, res.errors));
  if (!res.errors.empty()) res.scenarios.clear();
  std::sort(res.errors.begin(), res.errors.end(),
            [](const ConfigError& a, const ConfigError& b) { return a.line < b.line; });
  return res;
}

std::string RunOutcome::to_text() const {
  std::ostringstream os;
  os.precision(6);
  os << "scenario " << name << ": " << status << " (exit " << exit_code << ")\n";
  if (!message.empty()) os << "  " << message << "\n";
  for (const auto& w : warnings) os << "  warning: " << w << "\n";
  if (status == "ok" || status == "truncation_overflow") {
    os << "  D_pp = " << coefficients.d_pp << ", D_qq = " << coefficients.d_qq
       << ", gamma = " << coefficients.gamma
       << ", V_shift = " << coefficients.v_shift << "\n";
    os << "  " << brownian.to_text() << "\n";
  }
  if (oracle_max_rel_dev)
    os << "  oracle max rel dev = " << *oracle_max_rel_dev << "\n";
  if (min_eig_overall) os << "  min eigenvalue overall = " << *min_eig_overall << "\n";
  if (trace_drift_max) os << "  trace drift max = " << *trace_drift_max << "\n";
  if (!csv_path.empty()) os << "  wrote " << csv_path << "\n";
  if (!json_path.empty()) os << "  wrote " << json_path << "\n";
  os << "  wall time " << wall_time_s << " s\n";
  return os.str();
}

RunOutcome run_scenario(const Scenario& sc, const RunOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  RunOutcome out;
  out.name = sc.name;
  bool have_coeffs = false;
  std::optional<OracleDeviation> dev;

  const fs::path out_dir(opts.out_dir.empty() ? "." : opts.out_dir);
  const auto finish = [&](int code, const std::string& status,
                          const std::string& message) {
    out.exit_code = code;
    out.status = status;
    out.message = message;
    out.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    try {
      fs::create_directories(out_dir);
      const fs::path jp = out_dir / sc.outputs.json_name;
      write_json(jp.string(), outcome_json(out, sc, have_coeffs, dev));
      out.json_path = jp.string();
    } catch (const std::exception& e) {
      if (out.exit_code == 0) {
        out.exit_code = 1;
        out.status = "error";
        out.message = e.what();
      }
    }
    return out;
  };

  try {
    out.brownian = check_brownian_limit(sc.gas, sc.particle_mass);
    if (out.brownian.status == BrownianStatus::Fail &&
        !opts.override_brownian_limit) {
      return finish(1, "brownian_fail",
                    out.brownian.to_text() +
                        "; pass --override-brownian-limit to run anyway");
    }
    if (out.brownian.status != BrownianStatus::Ok)
      out.warnings.push_back(out.brownian.to_text());

    const double d_pp = compute_dpp(sc.gas, sc.tmatrix);
    const CoefficientSet cs =
        derive_coefficients(d_pp, sc.gas, sc.particle_mass, sc.tmatrix, sc.f_re0);
    HamiltonianSpec ham = sc.hamiltonian;
    ham.shift = cs.v_shift;
    const GeneratorSpec spec = GeneratorSpec::qbm(sc.form, cs, ham, sc.basis);
    out.coefficients = spec.effective_coefficients();
    have_coeffs = true;
    out.cp_report = cp_condition(out.coefficients);

    if (sc.outputs.scan_choi) {
      if (out.coefficients.gamma > 0.0) {
        double lo = std::numeric_limits<double>::infinity();
        for (const double f : {0.1, 0.5, 1.0, 2.0})
          lo = std::min(lo, choi_min_eigenvalue(
                                choi_matrix(spec, f / out.coefficients.gamma)));
        out.cp_report.choi_min_eig = lo;
        out.cp_report.choi_dim = sc.basis.dim;
      } else {
        out.warnings.push_back("choi scan skipped: gamma = 0 sets no timescale");
      }
    }

    DensityMatrix rho0 = [&] {
      switch (sc.initial.kind) {
        case InitialStateSpec::Kind::Fock:
          return dm_fock(sc.basis, sc.initial.fock_n);
        case InitialStateSpec::Kind::Coherent:
          if (std::norm(sc.initial.alpha) > sc.basis.dim / 4.0)
            out.warnings.push_back(
                "coherent |alpha|^2 exceeds dim/4; truncation may be audible "
                "in the observables");
          return dm_coherent(sc.basis, sc.initial.alpha);
        case InitialStateSpec::Kind::Thermal:
        default:
          return dm_thermal(sc.basis, sc.initial.beta_eff);
      }
    }();

    try {
      out.trajectory = integrate(spec, rho0, sc.integrator);
    } catch (const TruncationOverflow& e) {
      return finish(2, "truncation_overflow", e.what());
    }

    double min_eig = std::numeric_limits<double>::infinity();
    double drift = 0.0;
    for (const ObservableRow& r : out.trajectory->rows) {
      min_eig = std::min(min_eig, r.min_eig);
      drift = std::max(drift, r.trace_drift);
    }
    out.min_eig_overall = min_eig;
    out.trace_drift_max = drift;

    const ObservableRow& r0 = out.trajectory->rows.front();
    GaussianState g0{r0.mean_x, r0.mean_p, r0.var_x, r0.var_p, r0.cov_xp};
    const std::vector<GaussianState> orc = propagate_moments(
        g0, out.coefficients, ham, sc.particle_mass, out.trajectory->times);
    dev = oracle_deviation(*out.trajectory, orc);
    out.oracle_max_rel_dev = dev->max();
    out.stationary =
        stationary_moments(out.coefficients, ham, sc.particle_mass);

    fs::create_directories(out_dir);
    const fs::path cp = out_dir / sc.outputs.csv_name;
    write_csv(cp.string(), *out.trajectory);
    out.csv_path = cp.string();
    return finish(0, "ok", "");
  } catch (const std::exception& e) {
    return finish(1, "error", e.what());
  }
}

std::vector<RunOutcome> run_all(const std::vector<Scenario>& scenarios,
                                const RunOptions& opts) {
  std::vector<RunOutcome> out(scenarios.size());
  const int jobs = std::max(1, std::min<int>(opts.jobs, scenarios.size()));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < scenarios.size(); ++i)
      out[i] = run_scenario(scenarios[i], opts);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= scenarios.size()) return;
        out[i] = run_scenario(scenarios[i], opts);
      }
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

int combined_exit_code(const std::vector<RunOutcome>& outcomes) {
  bool any_error = false, any_abort = false;
  for (const auto& o : outcomes) {
    if (o.exit_code == 1) any_error = true;
    if (o.exit_code == 2) any_abort = true;
  }
  return any_error ? 1 : any_abort ? 2 : 0;
}

ComparisonResult compare_mode(const std::vector<Scenario>& scenarios,
                              const RunOptions& opts) {
  ComparisonResult res;
  if (scenarios.size() < 2) {
    res.error = "compare needs at least two scenarios in the config";
    res.exit_code = 1;
    return res;
  }
  const Scenario& ref = scenarios.front();
  for (const Scenario& sc : scenarios) {
    std::ostringstream bad;
    if (sc.gas.m != ref.gas.m || sc.gas.beta != ref.gas.beta ||
        sc.gas.n != ref.gas.n || sc.gas.hbar != ref.gas.hbar)
      bad << "gas parameters";
    if (sc.particle_mass != ref.particle_mass)
      bad << (bad.str().empty() ? "" : ", ") << "particle.M";
    if (sc.basis.dim != ref.basis.dim || sc.basis.omega_ref != ref.basis.omega_ref)
      bad << (bad.str().empty() ? "" : ", ") << "basis";
    if (!bad.str().empty()) {
      res.error = "scenario '" + sc.name + "' differs from '" + ref.name +
                  "' in " + bad.str() + "; compare requires a shared setting";
      res.exit_code = 1;
      return res;
    }
  }

  res.outcomes = run_all(scenarios, opts);

  std::ostringstream os;
  os << std::left << std::setw(22) << "scenario" << std::setw(18) << "form"
     << std::setw(14) << "D_pp" << std::setw(14) << "D_qq" << std::setw(14)
     << "gamma" << std::setw(20) << "CP verdict" << std::setw(14)
     << "min_eig" << std::setw(14) << "var_p(end)" << std::setw(14)
     << "var_p(stat)" << "status\n";
  os << std::scientific << std::setprecision(4);
  for (const RunOutcome& o : res.outcomes) {
    os << std::left << std::setw(22) << o.name << std::setw(18)
       << form_name(scenarios[&o - res.outcomes.data()].form) << std::setw(14)
       << o.coefficients.d_pp << std::setw(14) << o.coefficients.d_qq
       << std::setw(14) << o.coefficients.gamma << std::setw(20)
       << to_string(o.cp_report.verdict) << std::setw(14)
       << (o.min_eig_overall ? *o.min_eig_overall : std::nan("")) << std::setw(14)
       << (o.trajectory ? o.trajectory->rows.back().var_p : std::nan(""))
       << std::setw(14)
       << (o.stationary && o.stationary->var_p ? *o.stationary->var_p
                                               : std::nan(""))
       << o.status << "\n";
  }

  // Row-by-row agreement against the first scenario if the grids coincide.
  const RunOutcome& first = res.outcomes.front();
  for (std::size_t k = 1; k < res.outcomes.size(); ++k) {
    const RunOutcome& o = res.outcomes[k];
    if (!first.trajectory || !o.trajectory) continue;
    const auto& ta = first.trajectory->times;
    const auto& tb = o.trajectory->times;
    if (ta.size() != tb.size() || !std::equal(ta.begin(), ta.end(), tb.begin()))
      continue;
    double dobs = 0.0;
    for (std::size_t i = 0; i < ta.size(); ++i) {
      const ObservableRow& a = first.trajectory->rows[i];
      const ObservableRow& b = o.trajectory->rows[i];
      dobs = std::max({dobs, std::abs(a.mean_x - b.mean_x),
                       std::abs(a.mean_p - b.mean_p), std::abs(a.var_x - b.var_x),
                       std::abs(a.var_p - b.var_p), std::abs(a.cov_xp - b.cov_xp),
                       std::abs(a.energy - b.energy),
                       std::abs(a.purity - b.purity)});
    }
    const double dstate =
        (first.trajectory->final_state - o.trajectory->final_state).norm();
    os << "agreement " << first.name << " vs " << o.name
       << ": max |observable diff| = " << dobs
       << ", final-state Frobenius distance = " << dstate << "\n";
  }

  res.table_text = os.str();
  res.exit_code = combined_exit_code(res.outcomes);
  return res;
}

}  // namespace cpqbm
