#pragma once

// Command-line front end. Kept in a header so the test suite can drive it
// in-process through run().

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "biharm/biharm.hpp"

namespace biharm::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kBracket = 2,
  kNonConvergence = 3,
  kRegime = 4,
  kValidation = 5,
};

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Usage: return kUsage;
    case ErrorKind::BracketFailure: return kBracket;
    case ErrorKind::NonConvergence:
    case ErrorKind::BlowUp:
    case ErrorKind::StepUnderflow:
    case ErrorKind::TailNonConvergence: return kNonConvergence;
    case ErrorKind::Regime:
    case ErrorKind::NoExplicitSolution: return kRegime;
    case ErrorKind::Domain:
    case ErrorKind::Validation: return kValidation;
  }
  return kValidation;
}

/// Raw parameter values; unset fields fall back to the config file, then to
/// defaults.
struct Settings {
  std::optional<double> n, alpha, beta, p, lambda, mu, a, tol, grid_L, grid_h;
  std::string format = "json";
  std::string output;
};

inline void merge_config(Settings& s, const Json& cfg) {
  auto take = [&](std::optional<double>& dst, std::initializer_list<const char*> keys) {
    if (dst) return;  // flag given explicitly
    for (const char* k : keys) {
      if (cfg.contains(k)) {
        if (!cfg[k].is_number()) {
          throw Error(ErrorKind::Usage, std::string("config key '") + k + "' must be a number");
        }
        dst = cfg[k].get<double>();
        return;
      }
    }
  };
  take(s.n, {"n"});
  take(s.alpha, {"alpha"});
  take(s.beta, {"beta"});
  take(s.p, {"p"});
  take(s.lambda, {"lambda"});
  take(s.mu, {"mu"});
  take(s.a, {"a"});
  take(s.tol, {"tol"});
  take(s.grid_L, {"grid_L", "grid-L"});
  take(s.grid_h, {"grid_h", "grid-h"});
  if (cfg.contains("format") && cfg["format"].is_string() && s.format.empty()) {
    s.format = cfg["format"].get<std::string>();
  }
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Usage, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Usage, "malformed JSON in '" + path + "': " + e.what());
  }
}

inline ProblemParams make_params(const Settings& s) {
  const double n = s.n.value_or(6.0);
  if (n != std::floor(n)) throw Error(ErrorKind::Validation, "dimension n must be an integer");
  return ProblemParams::create(static_cast<int>(n), s.alpha.value_or(0.0), s.p.value_or(5.0),
                               s.lambda.value_or(0.0), s.mu.value_or(0.0), s.beta);
}

inline Json params_json(const ProblemParams& p) {
  return {{"n", p.n()},       {"alpha", p.alpha()}, {"beta", p.beta()},
          {"p", p.p()},       {"lambda", p.lambda()}, {"mu", p.mu()}};
}

inline Json complex_list(const DerivedCoefficients& d) {
  Json out = Json::array();
  for (const auto& z : d.lam) {
    if (d.eigenvalues_real) {
      out.push_back(z.real());
    } else {
      out.push_back({{"re", z.real()}, {"im", z.imag()}});
    }
  }
  return out;
}

/// A command's result: JSON payload plus an optional CSV table.
struct Payload {
  Json json;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
};

inline std::string fmt(double x) { return format_double(x); }

inline Payload cmd_info(const Settings& s) {
  const ProblemParams prm = make_params(s);
  const auto d = derive_coefficients(prm);
  const auto c = check_conditions(prm);
  Json r;
  r["K2"] = d.K2;
  r["K0"] = d.K0;
  r["l"] = d.l ? Json(*d.l) : Json(nullptr);
  r["eigenvalues_real"] = d.eigenvalues_real;
  r["eigenvalues"] = complex_list(d);
  r["conditions"] = {{"c1", c.c1},
                     {"c2", c.c2},
                     {"c3", c.c3},
                     {"norm_ok", c.norm_ok},
                     {"uniqueness_ok", c.uniqueness_ok},
                     {"periodicity_regime", c.periodicity_regime},
                     {"singular_regime", c.singular_regime}};
  r["singularity"] = d.eigenvalues_real ? to_json(classify_singularity(prm)) : Json(nullptr);
  Payload out;
  out.json = {{"params", params_json(prm)}, {"result", r}};
  out.csv_header = {"K2", "K0", "l", "c1", "c2", "c3", "uniqueness_ok"};
  out.csv_rows = {{fmt(d.K2), fmt(d.K0), d.l ? fmt(*d.l) : "", c.c1 ? "true" : "false",
                   c.c2 ? "true" : "false", c.c3 ? "true" : "false",
                   c.uniqueness_ok ? "true" : "false"}};
  return out;
}

inline Payload cmd_explicit(const Settings& s) {
  const ProblemParams prm = make_params(s);
  const CoshSolution cs = build_cosh_solution(prm);
  Json r = {{"m", cs.m},       {"nu", cs.nu},
            {"C", cs.C},       {"case", to_string(cs.case_tag)},
            {"gamma_decay", cs.gamma_decay}};
  // u(r) ~ (C/2^m) r^{-gamma} as r -> 0.
  r["u_at_origin"] = std::abs(cs.gamma_decay) < 1e-12 ? Json(cs.C / std::pow(2.0, cs.m))
                     : cs.gamma_decay > 0.0            ? Json("infinite")
                                                       : Json(0.0);
  double res = 0.0;
  Payload out;
  out.csv_header = {"t", "v", "v1", "v2", "v3", "v4", "residual"};
  for (int i = 0; i <= 240; ++i) {
    const double t = -12.0 + 0.1 * i;
    const auto v = eval_v_all(cs, t);
    const double e = v[4] - cs.coeffs.K2 * v[2] + cs.coeffs.K0 * v[0] - std::pow(v[0], prm.p());
    res = std::max(res, std::abs(e) / std::max(1.0, std::pow(v[0], prm.p())));
    out.csv_rows.push_back(
        {fmt(t), fmt(v[0]), fmt(v[1]), fmt(v[2]), fmt(v[3]), fmt(v[4]), fmt(e)});
  }
  r["residual_sup"] = res;
  out.json = {{"params", params_json(prm)}, {"result", r}};
  return out;
}

inline PeriodicOptions periodic_options(const Settings& s) {
  PeriodicOptions o;
  if (s.tol) o.tol = *s.tol;
  return o;
}

inline Payload cmd_orbit(const Settings& s) {
  if (!s.a) throw Error(ErrorKind::Usage, "orbit: --a (minimum value) is required");
  const ProblemParams prm = make_params(s);
  const auto orb = find_periodic(*s.a, prm, periodic_options(s));
  Payload out;
  out.json = {{"params", params_json(prm)}, {"result", to_json(orb)}};
  out.csv_header = {"t", "v", "v1", "v2", "v3", "E"};
  const Trajectory tr = integrate_orbit(orb, 1.0);
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const auto& st = tr.states[i];
    out.csv_rows.push_back({fmt(st.t), fmt(st.y[0]), fmt(st.y[1]), fmt(st.y[2]), fmt(st.y[3]),
                            fmt(tr.energies[i])});
  }
  return out;
}

inline Payload cmd_homoclinic(const Settings& s) {
  const ProblemParams prm = make_params(s);
  const auto h = find_homoclinic(prm);
  Payload out;
  out.json = {{"params", params_json(prm)}, {"result", to_json(h)}};
  out.csv_header = {"t", "v", "v1", "v2", "v3", "E"};
  const auto& tr = h.samples;
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const auto& st = tr.states[i];
    out.csv_rows.push_back({fmt(st.t), fmt(st.y[0]), fmt(st.y[1]), fmt(st.y[2]), fmt(st.y[3]),
                            fmt(tr.energies[i])});
  }
  return out;
}

inline Payload cmd_best_constant(const Settings& s) {
  const ProblemParams prm = make_params(s);
  const double L = s.grid_L.value_or(40.0);
  const double h = s.grid_h.value_or(0.01);
  std::optional<BestConstantResult> closed;
  try {
    closed = phi_closed_form(prm);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoExplicitSolution) throw;
  }
  const MinimizeResult mr = minimize_rayleigh(prm, L, h);
  BestConstantResult num;
  num.phi = mr.value;
  num.S_rad = std::pow(sphere_measure(prm.n()), (prm.p() - 1.0) / (prm.p() + 1.0)) * mr.value;
  num.source = ConstantSource::Numerical;
  num.L = L;
  num.h = h;
  num.iterations = mr.iterations;

  Json r;
  r["closed_form"] = closed ? to_json(*closed) : Json(nullptr);
  r["numerical"] = to_json(num);
  r["rel_diff"] = closed ? Json(std::abs(num.phi - closed->phi) / closed->phi) : Json(nullptr);
  r["warnings"] = mr.warnings;
  Payload out;
  out.json = {{"params", params_json(prm)}, {"result", r}};
  out.csv_header = {"t", "v"};
  for (std::size_t i = 0; i < mr.grid.size(); i += 10) {
    out.csv_rows.push_back({fmt(mr.grid.t(i)), fmt(mr.grid.values[i])});
  }
  return out;
}

/// Manifest: {"cases": [{"identity", "function", "n", "alpha", "lambda"?, "mu"?}]}.
/// Returns the payload and whether every check passed.
inline std::pair<Payload, bool> cmd_verify(const std::string& manifest_path) {
  const Json m = load_json_file(manifest_path);
  if (!m.contains("cases") || !m["cases"].is_array()) {
    throw Error(ErrorKind::Usage, "manifest must contain a \"cases\" array");
  }
  const QuadratureGrid grid = QuadratureGrid::make();
  Json reports = Json::array();
  bool all = true;
  Payload out;
  out.csv_header = {"identity", "function", "n", "alpha", "lambda", "mu", "lhs", "rhs",
                    "rel_err", "passed"};
  for (const auto& c : m["cases"]) {
    try {
      const IdentityId id = identity_from_string(c.at("identity").get<std::string>());
      const std::string fname = c.at("function").get<std::string>();
      const RadialTestFunction f = test_function_by_name(fname);
      const int n = c.at("n").get<int>();
      const double alpha = c.at("alpha").get<double>();
      const double lambda = c.value("lambda", 0.0);
      const double mu = c.value("mu", 0.0);
      const IdentityReport r = verify_identity(id, f, n, alpha, lambda, mu, grid);
      Json j = {{"function", fname}, {"n", n}, {"alpha", alpha}, {"lambda", lambda}, {"mu", mu}};
      j.update(to_json(r));
      reports.push_back(j);
      all = all && r.passed;
      out.csv_rows.push_back({to_string(id), fname, std::to_string(n), fmt(alpha), fmt(lambda),
                              fmt(mu), fmt(r.lhs), fmt(r.rhs), fmt(r.rel_err),
                              r.passed ? "true" : "false"});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Usage, std::string("malformed manifest case: ") + e.what());
    }
  }
  out.json = {{"manifest", manifest_path}, {"all_passed", all}, {"reports", reports}};
  return {out, all};
}

struct Axis {
  std::string name;
  double from = 0.0;
  double to = 0.0;
  int points = 0;

  [[nodiscard]] double at(int i) const {
    return points == 1 ? from : from + (to - from) * i / (points - 1);
  }
};

/// "name:from:to:points"
inline Axis parse_axis(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 4) {
    throw Error(ErrorKind::Usage, "sweep axis must look like name:from:to:points, got '" + text + "'");
  }
  static const std::vector<std::string> known = {"n",  "alpha", "beta", "p", "lambda",
                                                 "mu", "a",     "tol"};
  if (std::find(known.begin(), known.end(), parts[0]) == known.end()) {
    throw Error(ErrorKind::Usage, "unknown sweep parameter '" + parts[0] + "'");
  }
  Axis ax;
  ax.name = parts[0];
  try {
    ax.from = std::stod(parts[1]);
    ax.to = std::stod(parts[2]);
    ax.points = std::stoi(parts[3]);
  } catch (const std::exception&) {
    throw Error(ErrorKind::Usage, "sweep axis values must be numeric: '" + text + "'");
  }
  if (ax.points < 1) throw Error(ErrorKind::Usage, "sweep grid is empty: '" + text + "'");
  return ax;
}

inline void set_param(Settings& s, const std::string& name, double v) {
  if (name == "n") s.n = v;
  else if (name == "alpha") s.alpha = v;
  else if (name == "beta") s.beta = v;
  else if (name == "p") s.p = v;
  else if (name == "lambda") s.lambda = v;
  else if (name == "mu") s.mu = v;
  else if (name == "a") s.a = v;
  else if (name == "tol") s.tol = v;
}

/// Scalar outputs of one command for a sweep row (column names, values).
inline std::vector<std::pair<std::string, Json>> sweep_columns(const std::string& cmd,
                                                               const Settings& s) {
  if (cmd == "info") {
    const Json r = cmd_info(s).json["result"];
    return {{"K2", r["K2"]},
            {"K0", r["K0"]},
            {"c1", r["conditions"]["c1"]},
            {"c2", r["conditions"]["c2"]},
            {"c3", r["conditions"]["c3"]},
            {"uniqueness_ok", r["conditions"]["uniqueness_ok"]},
            {"verdict", r["singularity"].is_null() ? Json(nullptr)
                                                   : r["singularity"]["verdict"]}};
  }
  if (cmd == "orbit") {
    if (!s.a) throw Error(ErrorKind::Usage, "orbit sweep needs --a or an 'a' axis");
    const auto orb = find_periodic(*s.a, make_params(s), periodic_options(s));
    return {{"period", orb.period},
            {"b", orb.b},
            {"max_value", orb.max_value},
            {"residual_sup", orb.residual_sup}};
  }
  if (cmd == "homoclinic") {
    const auto h = find_homoclinic(make_params(s));
    return {{"peak", h.peak}, {"decay_rate", h.decay_rate}};
  }
  if (cmd == "explicit") {
    const CoshSolution cs = build_cosh_solution(make_params(s));
    return {{"m", cs.m}, {"nu", cs.nu}, {"C", cs.C}, {"case", to_string(cs.case_tag)}};
  }
  if (cmd == "best-constant") {
    const auto b = phi_closed_form(make_params(s));
    return {{"phi", b.phi}, {"S_rad", b.S_rad}};
  }
  throw Error(ErrorKind::Usage, "sweep: unsupported command '" + cmd + "'");
}

inline Payload cmd_sweep(const Settings& base, const std::string& cmd,
                         const std::vector<std::string>& axes_spec, long cap) {
  if (axes_spec.empty() || axes_spec.size() > 2) {
    throw Error(ErrorKind::Usage, "sweep needs one or two --axis options");
  }
  // Validate the command name before running anything.
  static const std::vector<std::string> cmds = {"info", "orbit", "homoclinic", "explicit",
                                                "best-constant"};
  if (std::find(cmds.begin(), cmds.end(), cmd) == cmds.end()) {
    throw Error(ErrorKind::Usage, "sweep: unsupported command '" + cmd + "'");
  }
  std::vector<Axis> axes;
  for (const auto& a : axes_spec) axes.push_back(parse_axis(a));
  const long total = axes.size() == 1 ? long(axes[0].points)
                                      : long(axes[0].points) * long(axes[1].points);
  if (total > cap) {
    std::ostringstream os;
    os << "sweep grid has " << total << " points, above the cap of " << cap;
    throw Error(ErrorKind::Usage, os.str());
  }

  Json rows = Json::array();
  std::vector<std::string> value_cols;
  std::vector<Json> row_list;
  for (long idx = 0; idx < total; ++idx) {
    Settings s = base;
    Json row;
    row["index"] = idx;
    const int i0 = axes.size() == 1 ? int(idx) : int(idx / axes[1].points);
    set_param(s, axes[0].name, axes[0].at(i0));
    row[axes[0].name] = axes[0].at(i0);
    if (axes.size() == 2) {
      const int i1 = int(idx % axes[1].points);
      set_param(s, axes[1].name, axes[1].at(i1));
      row[axes[1].name] = axes[1].at(i1);
    }
    try {
      for (auto& [k, v] : sweep_columns(cmd, s)) {
        row[k] = v;
        if (std::find(value_cols.begin(), value_cols.end(), k) == value_cols.end()) {
          value_cols.push_back(k);
        }
      }
      row["code"] = 0;
      row["error"] = nullptr;
    } catch (const Error& e) {
      row["code"] = exit_code_for(e.kind());
      row["error"] = to_string(e.kind());
    }
    rows.push_back(row);
  }

  Payload out;
  Json ax = Json::array();
  for (const auto& a : axes) {
    ax.push_back({{"name", a.name}, {"from", a.from}, {"to", a.to}, {"points", a.points}});
  }
  out.json = {{"command_template", cmd}, {"axes", ax}, {"rows", rows}};
  out.csv_header = {"index"};
  for (const auto& a : axes) out.csv_header.push_back(a.name);
  for (const auto& c : value_cols) out.csv_header.push_back(c);
  out.csv_header.push_back("code");
  out.csv_header.push_back("error");
  for (const auto& r : rows) {
    std::vector<std::string> line;
    for (const auto& h : out.csv_header) {
      if (!r.contains(h) || r[h].is_null()) {
        line.push_back("");
      } else if (r[h].is_number_float()) {
        line.push_back(fmt(r[h].get<double>()));
      } else if (r[h].is_string()) {
        line.push_back(r[h].get<std::string>());
      } else {
        line.push_back(r[h].dump());
      }
    }
    out.csv_rows.push_back(line);
  }
  return out;
}

inline void emit(const Payload& p, const std::string& command, const Settings& s,
                 std::ostream& out) {
  std::ostringstream doc;
  if (s.format == "csv") {
    write_csv(doc, p.csv_header, p.csv_rows);
  } else {
    Json j;
    j["schema"] = "1";
    j["command"] = command;
    for (auto it = p.json.begin(); it != p.json.end(); ++it) j[it.key()] = it.value();
    doc << to_json_string(j);
  }
  if (s.output.empty() || s.output == "-") {
    out << doc.str();
  } else {
    std::ofstream f(s.output, std::ios::binary);
    if (!f) throw Error(ErrorKind::Usage, "cannot write '" + s.output + "'");
    f << doc.str();
  }
}

/// Runs one invocation; args exclude the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radial weighted fourth-order equation toolkit"};
  app.require_subcommand(1, 1);

  struct Raw {
    double n = 0, alpha = 0, beta = 0, p = 0, lambda = 0, mu = 0, a = 0, tol = 0, L = 0, h = 0;
  } raw;
  Settings st;
  std::string config, manifest, sweep_cmd = "info";
  std::vector<std::string> axes;
  long cap = 10000;
  std::map<std::string, CLI::Option*> opts;

  auto add_common = [&](CLI::App* sub) {
    opts[sub->get_name() + "n"] = sub->add_option("--n", raw.n, "dimension (integer >= 5)");
    opts[sub->get_name() + "alpha"] = sub->add_option("--alpha", raw.alpha, "weight exponent");
    opts[sub->get_name() + "beta"] =
        sub->add_option("--beta", raw.beta, "right-hand side weight (default: from p)");
    opts[sub->get_name() + "p"] = sub->add_option("--p", raw.p, "nonlinearity exponent");
    opts[sub->get_name() + "lambda"] = sub->add_option("--lambda", raw.lambda);
    opts[sub->get_name() + "mu"] = sub->add_option("--mu", raw.mu);
    opts[sub->get_name() + "a"] = sub->add_option("--a", raw.a, "periodic orbit minimum");
    opts[sub->get_name() + "tol"] = sub->add_option("--tol", raw.tol);
    opts[sub->get_name() + "L"] = sub->add_option("--grid-L", raw.L, "half-length of the grid");
    opts[sub->get_name() + "h"] = sub->add_option("--grid-h", raw.h, "grid spacing");
    sub->add_option("--format", st.format)->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--output", st.output, "output path (default stdout)");
    sub->add_option("--config", config, "JSON file with parameter values");
  };

  std::vector<CLI::App*> subs;
  for (const char* name : {"info", "explicit", "orbit", "homoclinic", "best-constant"}) {
    subs.push_back(app.add_subcommand(name));
  }
  CLI::App* verify = app.add_subcommand("verify", "check identities listed in a manifest");
  CLI::App* sweep = app.add_subcommand("sweep", "run a command over a parameter grid");
  subs.push_back(verify);
  subs.push_back(sweep);
  subs[0]->description("coefficients, eigenvalues and conditions");
  subs[1]->description("explicit cosh-power solution");
  subs[2]->description("periodic orbit with a prescribed minimum");
  subs[3]->description("even homoclinic profile");
  subs[4]->description("best constant, closed form and numerical");
  for (auto* s : subs) add_common(s);
  verify->add_option("--manifest", manifest, "JSON manifest of identity checks")->required();
  sweep->add_option("--cmd", sweep_cmd, "command to run at each grid point");
  sweep->add_option("--axis", axes, "name:from:to:points (one or two)");
  sweep->add_option("--cap", cap, "maximum number of grid points");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string cmd = chosen->get_name();
  auto given = [&](const char* key) { return opts[cmd + key]->count() > 0; };
  if (given("n")) st.n = raw.n;
  if (given("alpha")) st.alpha = raw.alpha;
  if (given("beta")) st.beta = raw.beta;
  if (given("p")) st.p = raw.p;
  if (given("lambda")) st.lambda = raw.lambda;
  if (given("mu")) st.mu = raw.mu;
  if (given("a")) st.a = raw.a;
  if (given("tol")) st.tol = raw.tol;
  if (given("L")) st.grid_L = raw.L;
  if (given("h")) st.grid_h = raw.h;

  try {
    if (!config.empty()) merge_config(st, load_json_file(config));
    Payload p;
    int code = kOk;
    if (cmd == "info") p = cmd_info(st);
    else if (cmd == "explicit") p = cmd_explicit(st);
    else if (cmd == "orbit") p = cmd_orbit(st);
    else if (cmd == "homoclinic") p = cmd_homoclinic(st);
    else if (cmd == "best-constant") p = cmd_best_constant(st);
    else if (cmd == "verify") {
      auto [payload, ok] = cmd_verify(manifest);
      p = std::move(payload);
      if (!ok) {
        err << "verify: at least one identity check failed\n";
        code = kValidation;
      }
    } else if (cmd == "sweep") {
      p = cmd_sweep(st, sweep_cmd, axes, cap);
    }
    emit(p, cmd, st, out);
    return code;
  } catch (const Error& e) {
    err << cmd << ": " << to_string(e.kind()) << ": " << e.what() << "\n";
    if (st.format != "csv") {
      Json j;
      j["schema"] = "1";
      j["command"] = cmd;
      j["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
      out << to_json_string(j);
    }
    return exit_code_for(e.kind());
  }
}

}  // namespace biharm::cli
