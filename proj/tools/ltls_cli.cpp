// ltls: excitation probability of a two-state system driven by a Lorentzian
// pulse, by numeric propagation, the DDP closed form and confluent Heun
// functions.
//
//   ltls point        --omega0T 1 --deltaT 2 --methods numeric,ddp-sech
//   ltls lineshape    --omega0T 0.2 --start 0 --stop 3 --points 61
//   ltls oscillations --deltaT 2 --start 0.01 --stop 20 --points 2000
//   ltls stokes       --omega0T 4 --deltaT 2 --span 6 --step 0.01
//   ltls heun-verify  --omega0T 1 --deltaT 1
//
// Exit codes: 0 ok, 2 bad arguments or domain error, 3 numerical
// non-convergence, 4 outside the DDP validity window with --strict.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ltls/ltls.hpp"

namespace {

using namespace ltls;

constexpr int kExitOk = 0;
constexpr int kExitBadArgs = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitOutsideValidity = 4;

// Keys accepted in config files and their command-line spelling.
const std::vector<std::pair<std::string, std::string>> kKeys = {
    {"omega0T", "--omega0T"}, {"deltaT", "--deltaT"}, {"T", "--T"},         {"methods", "--methods"},
    {"rel_tol", "--rel-tol"}, {"abs_tol", "--abs-tol"}, {"threads", "--threads"}, {"out", "--out"},
    {"json", "--json"},       {"start", "--start"},   {"stop", "--stop"},     {"points", "--points"},
    {"span", "--span"},       {"step", "--step"},     {"grid_points", "--grid-points"},
    {"grid_half_width", "--grid-half-width"},
};

// Keys that only steer where and how fast the output is produced.
const std::set<std::string> kNotEchoed = {"out", "json", "threads"};

struct Output {
  CsvTable csv;
  bool outside_validity = false;
};

double require(const Config& c, const std::string& key) {
  if (!c.count(key)) throw DomainError("missing required parameter '" + key + "'");
  return parse_double(c, key, 0.0);
}

ModelParams model(const Config& c) {
  const double T = parse_double(c, "T", 1.0);
  if (!(T > 0.0)) throw DomainError("T must be positive");
  return ModelParams(require(c, "omega0T") / T, require(c, "deltaT") / T, T);
}

PropagationSettings settings(const Config& c) {
  PropagationSettings s;
  s.rel_tol = parse_double(c, "rel_tol", s.rel_tol);
  s.abs_tol = parse_double(c, "abs_tol", s.abs_tol);
  detail::validate(s);
  return s;
}

unsigned threads(const Config& c) {
  const long t = parse_long(c, "threads", 1);
  if (t < 1 || t > 1024) throw DomainError("threads must be in [1, 1024]");
  return unsigned(t);
}

std::string col(Method m, const char* what) { return std::string(what) + "_" + std::string(method_name(m)); }

Output cmd_point(const Config& c) {
  const ModelParams p = model(c);
  const auto methods = parse_methods(c.count("methods") ? c.at("methods") : "numeric,ddp-sech");
  const PropagationSettings s = settings(c);
  Output out;
  auto& t = out.csv;
  t.columns = {"omega0T", "deltaT"};
  std::vector<double> row{p.omega0T(), p.deltaT()};
  for (Method m : methods) {
    switch (m) {
      case Method::numeric: {
        const PropagationResult r = propagate(p, s);
        t.columns.insert(t.columns.end(), {"P_numeric", "norm_defect", "steps"});
        row.insert(row.end(), {r.transition_probability, r.norm_defect, double(r.steps)});
        break;
      }
      case Method::ddp_sech:
      case Method::ddp_raw: {
        const DdpResult r = ddp_probability(p);
        const double gdev = std::max(std::abs(r.gamma_plus + 1.0), std::abs(r.gamma_minus - 1.0));
        t.columns.insert(t.columns.end(), {col(m, "P"), "re_D", "im_D", "P_two_point", "gamma_plus_re",
                                           "gamma_plus_im", "gamma_minus_re", "gamma_minus_im", "gamma_residual"});
        row.insert(row.end(), {m == Method::ddp_sech ? r.probability : r.probability_raw, r.d_plus.real(),
                               r.d_plus.imag(), r.probability_two_point, r.gamma_plus.real(), r.gamma_plus.imag(),
                               r.gamma_minus.real(), r.gamma_minus.imag(), gdev});
        out.outside_validity |= r.outside_validity;
        break;
      }
      case Method::heun: {
        const heun::HeunProbability r = heun::heun_probability(p);
        t.columns.push_back("P_heun");
        row.push_back(r.probability);
        break;
      }
    }
  }
  t.rows.push_back(row);
  return out;
}

SweepSpec sweep_spec(const Config& c, Axis axis, double start, double stop, std::size_t points) {
  SweepSpec s;
  s.axis = axis;
  s.T = parse_double(c, "T", 1.0);
  if (!(s.T > 0.0)) throw DomainError("T must be positive");
  s.fixed = require(c, axis == Axis::deltaT ? "omega0T" : "deltaT");
  s.start = parse_double(c, "start", start);
  s.stop = parse_double(c, "stop", stop);
  const long n = parse_long(c, "points", long(points));
  if (n < 2) throw DomainError("points must be >= 2");
  s.points = std::size_t(n);
  s.methods = parse_methods(c.count("methods") ? c.at("methods") : "numeric");
  s.settings = settings(c);
  s.validate();
  return s;
}

// Appends per-method P columns and counts cells left undefined by domain errors.
void sweep_rows(const SweepSpec& s, const SweepTable& tab, const char* axis, Output& out,
                const std::vector<std::vector<double>>& extra = {}) {
  auto& t = out.csv;
  t.columns.push_back(axis);
  for (Method m : s.methods) t.columns.push_back(col(m, "P"));
  std::size_t undefined = 0;
  for (std::size_t i = 0; i < tab.grid.size(); ++i) {
    std::vector<double> row{tab.grid[i]};
    for (const Cell& cell : tab.cells[i]) {
      row.push_back(cell.p);
      undefined += cell.domain_error;
      out.outside_validity |= cell.outside_validity;
    }
    for (const auto& e : extra) row.push_back(e[i]);
    t.rows.push_back(std::move(row));
  }
  if (undefined) t.note("undefined_cells", std::to_string(undefined) + " (method not defined at that point; nan)");
}

Output cmd_lineshape(const Config& c) {
  const SweepSpec s = sweep_spec(c, Axis::deltaT, 0.0, 3.0, 61);
  const bool has_numeric = std::find(s.methods.begin(), s.methods.end(), Method::numeric) != s.methods.end();
  const LineshapeResult r = lineshape(s, threads(c), has_numeric ? Method::numeric : s.methods.front());
  Output out;
  out.csv.note("linewidth_definition", "FWHM of P(deltaT) at fixed omega0T, in units of 1/T");
  out.csv.note("linewidth_method", std::string(method_name(r.width_method)));
  out.csv.note("linewidth_fwhm", r.linewidth);
  out.csv.note("multimodal", r.multimodal ? "1" : "0");
  for (const Lobe& lb : r.lobes)
    out.csv.note("lobe", "peak_deltaT=" + fmt17(lb.peak_deltaT) + ";peak_P=" + fmt17(lb.peak_p) +
                             ";left=" + fmt17(lb.left) + ";right=" + fmt17(lb.right) + ";fwhm=" + fmt17(lb.fwhm));
  sweep_rows(s, r.table, "deltaT", out);
  return out;
}

Output cmd_oscillations(const Config& c) {
  const SweepSpec s = sweep_spec(c, Axis::omega0T, 0.01, 20.0, 2000);
  const OscillationResult r = oscillations(s, threads(c));
  Output out;
  for (const Node& n : r.nodes)
    out.csv.note("node", "m=" + std::to_string(n.m) + ";omega0T=" + fmt17(n.omega0T) + ";numeric_min=" +
                             fmt17(n.numeric_min) + ";offset=" + fmt17(n.offset));
  sweep_rows(s, r.table, "omega0T", out, {r.envelope, r.phase});
  out.csv.columns.insert(out.csv.columns.end(), {"envelope_sech2_imD", "phase_reD"});
  out.outside_validity |= s.fixed < kAdiabaticWindowDeltaT;
  return out;
}

Output cmd_stokes(const Config& c) {
  const ModelParams p = model(c);
  StokesOptions o;
  o.span = parse_double(c, "span", o.span);
  o.step = parse_double(c, "step", o.step);
  const StokesPolyline line = trace_stokes_line(p, o);
  Output out;
  auto& t = out.csv;
  t.note("kind", "0 vertex, 1 tau_plus, 2 tau_minus");
  t.note("re_D", line.d_plus.real());
  t.note("im_D", line.d_plus.imag());
  t.note("max_residual", line.max_residual);
  t.note("arrival_gap", line.arrival_gap);
  t.columns = {"kind", "re_tau", "im_tau", "residual"};
  t.rows.push_back({1.0, line.points.tau_plus.real(), line.points.tau_plus.imag(), 0.0});
  t.rows.push_back({2.0, line.points.tau_minus.real(), line.points.tau_minus.imag(), 0.0});
  for (const StokesVertex& v : line.vertices) t.rows.push_back({0.0, v.tau.real(), v.tau.imag(), v.residual});
  return out;
}

Output cmd_heun_verify(const Config& c) {
  const ModelParams p = model(c);
  const long n = parse_long(c, "grid_points", 57);
  const double h = parse_double(c, "grid_half_width", 1.4);
  if (n < 2 || !(h > 0.0)) throw DomainError("heun-verify: need grid_points >= 2 and grid_half_width > 0");
  std::vector<double> taus(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) taus[std::size_t(i)] = -h + 2.0 * h * double(i) / double(n - 1);
  const heun::HeunVerifyReport r = heun::verify_heun_solution(p, taus);
  const auto& g = r.map.g;
  auto cs = [](cplx z) { return fmt17(z.real()) + (z.imag() < 0 ? "" : "+") + fmt17(z.imag()) + "i"; };
  Output out;
  auto& t = out.csv;
  t.note("gswe", "B1=" + cs(g.B1) + ";B2=" + cs(g.B2) + ";B3=" + cs(g.B3) + ";eta=" + cs(g.eta) +
                     ";omega=" + cs(g.omega) + ";z0=" + cs(g.z0));
  t.note("variable_map", "z=(1-i*tau)/2; b1=exp(-i*deltaT*tau/2)*((tau-i)/(tau+i))^(omega0T/4)*u(z)");
  t.note("heunc_tuple_derived", "(" + cs(r.derived.alpha) + "," + cs(r.derived.beta) + "," + cs(r.derived.gamma) +
                                    "," + cs(r.derived.delta) + "," + cs(r.derived.eta) + ")");
  t.note("fifth_argument_candidate", "(omega0T-deltaT)/8=" + fmt17(r.candidate_eta.real()));
  t.note("fifth_argument_verdict", r.candidate_eta_ok ? "candidate value satisfies the equation"
                                                    : "candidate value fails; omega0T^2/8-deltaT satisfies the equation");
  t.note("prefactor_verdict",
         std::string(r.prefactor_minus_ok ? "exp(-i*deltaT*tau)((tau-i)/(tau+i))^(omega0T/4) satisfies the equation"
                                          : "exp(-i*deltaT*tau)((tau-i)/(tau+i))^(omega0T/4) fails") +
             "; " +
             (r.prefactor_plus_ok ? "exp(+i*deltaT*tau)((tau+i)/(tau-i))^(omega0T/4) satisfies the equation"
                                  : "exp(+i*deltaT*tau)((tau+i)/(tau-i))^(omega0T/4) fails"));
  t.note("residual_verdict", r.residual_heunc_basis <= 1e-8 && r.residual_gswe_basis <= 1e-8
                                 ? "certified basis residual <= 1e-8"
                                 : "certified basis residual above 1e-8");
  t.columns = {"omega0T",          "deltaT",           "residual_gswe_basis", "residual_heunc_basis",
               "residual_candidate_fifth", "residual_other_prefactor", "fit_max_error", "c1_re", "c1_im", "c2_re",
               "c2_im",            "prefactor_minus_ok", "prefactor_plus_ok", "candidate_fifth_ok"};
  t.rows.push_back({p.omega0T(), p.deltaT(), r.residual_gswe_basis, r.residual_heunc_basis, r.residual_candidate_eta,
                    r.residual_other_prefactor, r.fit_max_error, r.c1.real(), r.c1.imag(), r.c2.real(), r.c2.imag(),
                    double(r.prefactor_minus_ok), double(r.prefactor_plus_ok), double(r.candidate_eta_ok)});
  return out;
}

nlohmann::json to_json(const std::string& command, const Config& echo, const CsvTable& t) {
  nlohmann::json j;
  j["version"] = std::string(kVersion);
  j["command"] = command;
  j["config"] = echo;
  j["notes"] = t.header;
  j["columns"] = t.columns;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json row = nlohmann::json::array();
    for (double v : r) row.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lorentzian two-state excitation probability: numeric, DDP and Heun"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  struct Sub {
    std::string name;
    Output (*run)(const Config&);
    CLI::App* app = nullptr;
    std::map<std::string, std::string> values;
    std::string config;
    bool strict = false;
  };
  std::vector<Sub> subs = {
      Sub{"point", cmd_point, nullptr, {}, {}, false},
      Sub{"lineshape", cmd_lineshape, nullptr, {}, {}, false},
      Sub{"oscillations", cmd_oscillations, nullptr, {}, {}, false},
      Sub{"stokes", cmd_stokes, nullptr, {}, {}, false},
      Sub{"heun-verify", cmd_heun_verify, nullptr, {}, {}, false},
  };
  const std::map<std::string, std::string> help = {
      {"point", "P at one parameter point per method, with diagnostics"},
      {"lineshape", "P(deltaT) at fixed omega0T and its FWHM"},
      {"oscillations", "P(omega0T) at fixed deltaT with DDP envelope, phase and nodes"},
      {"stokes", "Stokes line through the transition points as CSV vertices"},
      {"heun-verify", "residual check of the local confluent Heun solution"},
  };
  for (Sub& s : subs) {
    s.app = app.add_subcommand(s.name, help.at(s.name));
    s.app->add_option("--config", s.config, "flat key=value file; command-line flags win");
    s.app->add_flag("--strict", s.strict, "exit 4 when DDP is used outside deltaT >= 2");
    for (const auto& [key, flag] : kKeys) s.app->add_option(flag, s.values[key]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitBadArgs;
  }

  for (Sub& s : subs) {
    if (!s.app->parsed()) continue;
    try {
      Config cfg;
      if (!s.config.empty()) cfg = load_config(s.config);
      for (const auto& [key, value] : cfg) {
        const bool known = std::any_of(kKeys.begin(), kKeys.end(), [&](const auto& k) { return k.first == key; });
        if (!known && key != "strict") throw DomainError("unknown config key '" + key + "'");
      }
      for (const auto& [key, flag] : kKeys)
        if (s.app->count(flag) > 0) cfg[key] = s.values[key];
      const bool strict = s.strict || parse_bool(cfg, "strict", false);
      if (s.strict) cfg["strict"] = "true";

      Output out = s.run(cfg);
      Config echo;
      for (const auto& [k, v] : cfg)
        if (!kNotEchoed.count(k)) echo[k] = v;

      CsvTable csv;
      csv.header.push_back("ltls " + std::string(kVersion));
      csv.note("command", s.name);
      for (const auto& [k, v] : echo) csv.note("config." + k, v);
      if (out.outside_validity)
        csv.note("warning", "DDP evaluated with deltaT < 2, outside the tested adiabatic window");
      csv.header.insert(csv.header.end(), out.csv.header.begin(), out.csv.header.end());
      csv.columns = out.csv.columns;
      csv.rows = std::move(out.csv.rows);

      const std::string path = cfg.count("out") ? cfg.at("out") : "-";
      if (path == "-") {
        csv.write(std::cout);
      } else {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw DomainError("cannot write '" + path + "'");
        csv.write(f);
      }
      if (cfg.count("json")) {
        std::ofstream f(cfg.at("json"), std::ios::binary);
        if (!f) throw DomainError("cannot write '" + cfg.at("json") + "'");
        f << to_json(s.name, echo, csv).dump(2) << '\n';
      }
      if (out.outside_validity) {
        std::cerr << "warning: DDP evaluated with deltaT < 2, outside the tested adiabatic window\n";
        if (strict) return kExitOutsideValidity;
      }
      return kExitOk;
    } catch (const ConvergenceError& e) {
      std::cerr << "error: numerical non-convergence: " << e.what() << " (last reliable " << e.last_reliable()
                << ")\n";
      return kExitNoConvergence;
    } catch (const DomainError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitBadArgs;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitNoConvergence;
    }
  }
  return kExitBadArgs;
}
