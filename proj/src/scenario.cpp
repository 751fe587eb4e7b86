#include "lcms/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "lcms/cauchy.hpp"
#include "lcms/dynamics.hpp"
#include "lcms/errors.hpp"
#include "lcms/hj.hpp"
#include "lcms/identities.hpp"

namespace lcms {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

/// Re-raises an lcms error with the config field prepended.
template <class F>
auto in_field(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(key + ": " + e.what());
  } catch (const VariableError& e) {
    throw VariableError(key + ": " + e.what());
  } catch (const DomainError& e) {
    throw ParseError(key + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(key + ": " + e.what());
  } catch (const ChartMismatch& e) {
    throw ValidationError(key + ": " + e.what());
  }
}

double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ParseError(key + ": expected a number, got an empty value");
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used == t.size()) return v;
  } catch (const std::exception&) {
  }
  return in_field(key, [&] {
    const Expr e = parse(t);
    if (!e.is_constant()) throw ParseError("expected a constant, got '" + t + "'");
    return e.constant_value().value();
  });
}

Expr parse_expr(const std::string& key, const std::string& text) {
  return in_field(key, [&] { return parse(text); });
}

std::vector<Expr> parse_exprs(const Config& cfg, const std::string& key) {
  std::vector<Expr> out;
  for (const auto& s : cfg.list(key)) out.push_back(parse_expr(key, s));
  return out;
}

std::vector<std::vector<Expr>> parse_expr_rows(const Config& cfg, const std::string& key) {
  std::vector<std::vector<Expr>> out;
  for (const auto& row : split(cfg.text(key), ';')) {
    std::vector<Expr> r;
    for (const auto& s : split(row, ',')) r.push_back(parse_expr(key, s));
    out.push_back(std::move(r));
  }
  return out;
}

void require_size(const std::string& key, std::size_t got, std::size_t want) {
  if (got != want) {
    throw ValidationError(key + ": expected " + std::to_string(want) + " entries, got " + std::to_string(got));
  }
}

void require_shape(const std::string& key, const std::vector<std::vector<Expr>>& rows, std::size_t r, std::size_t c) {
  require_size(key + " (rows)", rows.size(), r);
  for (const auto& row : rows) require_size(key + " (columns)", row.size(), c);
}

// ---------------------------------------------------------------------------

struct Context {
  const Config& cfg;
  const RunOptions& options;
  std::uint64_t seed = 1;
  RunReport& report;

  [[nodiscard]] double tolerance(const std::string& name, double fallback) const {
    return cfg.number("tolerance." + name, fallback) * options.tolerance_scale;
  }
  void add(Check c) const { report.checks.push_back(std::move(c)); }
  void note(const std::string& key, const std::string& value) const { report.notes.push_back(key + ": " + value); }

  void write(const std::string& file, const std::string& content) const {
    if (!options.out_dir) return;
    std::filesystem::create_directories(*options.out_dir);
    const auto path = *options.out_dir / file;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << content;
    if (!os) throw std::runtime_error("failed writing " + path.string());
  }
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string join_row(const std::vector<double>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k > 0) out += ',';
    out += format_number(values[k]);
  }
  return out;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (k > 0) out += ',';
    out += names[k];
  }
  return out;
}

bool constant_lee_form(const LeeForm& theta) {
  return std::all_of(theta.components().begin(), theta.components().end(),
                     [](const Expr& e) { return e.is_constant(); });
}

bool is_free_particle(const HamiltonianData& h) {
  const auto& c = *h.family().dual_jet;
  Expr ref;
  for (int a = 0; a < h.n_fields(); ++a) {
    const Expr p = c.var(c.momentum_name(0, a));
    ref += Expr(Number::rational(1, 2)) * p * p;
  }
  return (h.expr() - ref).is_zero();
}

void connection_checks(const Context& ctx, const ScenarioGeometry& g) {
  const Connection c = connection_from_hamiltonian(g.hamiltonian, g.theta);
  ctx.add(Check::holds("connection", check_connection_condition(c, g.hamiltonian, g.theta).is_zero()));
  if (g.theta.is_zero()) {
    ctx.add(Check::holds("theta_zero_omega",
                         (omega_h(g.hamiltonian, g.theta) - multisymplectic_omega_h(g.hamiltonian)).is_zero()));
  }
}

// ---------------------------------------------------------------------------

struct MechFinal {
  std::vector<double> sigma, p;
};

MechFinal final_values(const MechTrajectory& traj) {
  MechFinal out;
  for (const auto& s : traj.sigma) out.sigma.push_back(s.back());
  for (const auto& p : traj.p) out.p.push_back(p.back());
  return out;
}

double distance(const MechFinal& a, const MechFinal& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.sigma.size(); ++k) {
    d = std::max({d, std::abs(a.sigma[k] - b.sigma[k]), std::abs(a.p[k] - b.p[k])});
  }
  return d;
}

void run_mechanics(const Context& ctx) {
  const Config& cfg = ctx.cfg;
  const ScenarioGeometry g = build_geometry(cfg);
  if (g.family.m() != 1) throw ValidationError("chart.m: mechanics scenarios need m = 1");
  const auto n = static_cast<std::size_t>(g.family.n_fields());
  const std::vector<double> sigma0 = cfg.numbers("initial.sigma");
  const std::vector<double> p0 = cfg.numbers("initial.p");
  require_size("initial.sigma", sigma0.size(), n);
  require_size("initial.p", p0.size(), n);
  const double t0 = cfg.number("run.t0", 0.0);
  const double t1 = cfg.number("run.t1", 1.0);
  const double dt = cfg.number("run.dt", 1e-3);

  const MechTrajectory traj = integrate_mechanics(g.hamiltonian, g.theta, sigma0, p0, t0, t1, dt);
  const MechFinal last = final_values(traj);
  const auto& c = *g.family.dual_jet;

  const bool closed_form = is_free_particle(g.hamiltonian) && constant_lee_form(g.theta);
  auto exact = [&](double duration) {
    MechFinal out;
    const double th = g.theta.component(0).constant_value().value();
    for (std::size_t a = 0; a < n; ++a) {
      const auto cf = mechanics_closed_form(th, sigma0[a], p0[a], duration);
      out.sigma.push_back(cf.sigma);
      out.p.push_back(cf.p);
    }
    return out;
  };
  if (closed_form) {
    const MechFinal ref = exact(t1 - t0);
    const double tol = ctx.tolerance("closed_form", 1e-8);
    for (std::size_t a = 0; a < n; ++a) {
      const std::string f = c.fiber_name(static_cast<int>(a));
      ctx.add(Check::near("sigma_final[" + f + "]", last.sigma[a], ref.sigma[a], tol));
      ctx.add(Check::near("p_final[" + f + "]", last.p[a], ref.p[a], tol));
    }
  } else {
    ctx.note("closed_form", "unavailable");
  }

  const Residual res = lchdw_residual(as_grid_section(traj), g.hamiltonian, g.theta, 4);
  ctx.add(Check::at_most("trajectory_residual", res.max_norm(), ctx.tolerance("trajectory_residual", 1e-8)));

  const double order_dt = cfg.number("run.order_dt", 0.05);
  auto run = [&](double step) {
    return final_values(integrate_mechanics(g.hamiltonian, g.theta, sigma0, p0, t0, t1, step));
  };
  const MechFinal y1 = run(order_dt), y2 = run(order_dt / 2);
  double e1 = 0.0, e2 = 0.0;
  if (closed_form) {
    const MechFinal ref = exact(t1 - t0);
    e1 = distance(y1, ref);
    e2 = distance(y2, ref);
  } else {
    const MechFinal y4 = run(order_dt / 4);
    e1 = distance(y1, y2);
    e2 = distance(y2, y4);
  }
  if (e1 <= 1e-12) {
    ctx.add(Check::at_most("rk4_coarse_error", e1, 1e-12));
  } else {
    const double order = std::log2(e1 / e2);
    ctx.note("rk4_errors", format_number(e1) + ", " + format_number(e2));
    ctx.add(Check::at_least("rk4_order", order, cfg.number("tolerance.rk4_order", 3.8)));
  }
  connection_checks(ctx, g);

  std::vector<std::string> header{"t"};
  for (std::size_t a = 0; a < n; ++a) header.push_back("sigma_" + c.fiber_name(static_cast<int>(a)));
  for (std::size_t a = 0; a < n; ++a) header.push_back(c.momentum_name(0, static_cast<int>(a)));
  std::string csv = join_names(header) + "\n";
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    std::vector<double> row{traj.t[k]};
    for (std::size_t a = 0; a < n; ++a) row.push_back(traj.sigma[a][k]);
    for (std::size_t a = 0; a < n; ++a) row.push_back(traj.p[a][k]);
    csv += join_row(row) + "\n";
  }
  ctx.write("trajectory.csv", csv);
}

// ---------------------------------------------------------------------------

void run_scalar_field(const Context& ctx) {
  const Config& cfg = ctx.cfg;
  const ScenarioGeometry g = build_geometry(cfg);
  const auto m = static_cast<std::size_t>(g.family.m());
  const auto n = static_cast<std::size_t>(g.family.n_fields());
  const std::vector<Expr> sigma = parse_exprs(cfg, "section.sigma");
  require_size("section.sigma", sigma.size(), n);
  const auto momenta = parse_expr_rows(cfg, "section.momenta");
  require_shape("section.momenta", momenta, m, n);

  const SectionMap phi = in_field("section", [&] { return field_section(g.family, sigma, momenta); });
  const Residual r = lchdw_residual(phi, g.hamiltonian, g.theta);
  for (const auto& comp : r.components) ctx.note(comp.name, comp.expr.to_string());
  ctx.add(Check::holds("lchdw_symbolic", r.is_zero()));

  if (g.theta.is_zero()) {
    const Residual ms = hdw_residual(phi, g.hamiltonian);
    bool same = ms.components.size() == r.components.size();
    for (std::size_t k = 0; same && k < r.components.size(); ++k) {
      same = ms.components[k].name == r.components[k].name && (ms.components[k].expr - r.components[k].expr).is_zero();
    }
    ctx.add(Check::holds("theta_zero_hdw", same));
  }
  connection_checks(ctx, g);

  if (cfg.has("reduced_hj.S")) {
    const std::vector<Expr> s = parse_exprs(cfg, "reduced_hj.S");
    require_size("reduced_hj.S", s.size(), m);
    std::optional<Expr> f;
    if (cfg.has("reduced_hj.f")) f = parse_expr("reduced_hj.f", cfg.text("reduced_hj.f"));
    const ReducedHJResult red = in_field("reduced_hj", [&] { return reduced_hj_residual(g.family, s, g.hamiltonian, f); });
    ctx.note("reduced_hj_f", red.f.to_string() + (red.f_inferred ? " (inferred)" : ""));
    ctx.note("reduced_hj_residual", red.residual.at("hj").expr.to_string());
    ctx.add(Check::holds("reduced_hj", red.residual.is_zero()));
  }
}

// ---------------------------------------------------------------------------

void run_hj_verify(const Context& ctx) {
  const Config& cfg = ctx.cfg;
  const ScenarioGeometry g = build_geometry(cfg);
  const auto m = static_cast<std::size_t>(g.family.m());
  const auto n = static_cast<std::size_t>(g.family.n_fields());
  const auto gamma = parse_expr_rows(cfg, "gamma.gamma");
  require_shape("gamma.gamma", gamma, m, n);
  std::optional<Expr> rho;
  if (cfg.has("gamma.rho")) rho = parse_expr("gamma.rho", cfg.text("gamma.rho"));
  const GammaSection section = in_field("gamma", [&] { return GammaSection(g.family, gamma, rho); });

  RoundtripOptions opt;
  opt.initial = cfg.rows("roundtrip.initial");
  for (const auto& row : opt.initial) require_size("roundtrip.initial", row.size(), n);
  opt.start = cfg.number("roundtrip.start", 0.0);
  opt.stop = cfg.number("roundtrip.stop", 1.0);
  opt.step = cfg.number("roundtrip.step", 1e-3);
  opt.hj_tolerance = ctx.tolerance("hj", 1e-10);
  opt.roundtrip_tolerance = ctx.tolerance("roundtrip", 1e-6);

  const HJReport rep = roundtrip_verify(section, g.hamiltonian, g.theta, opt);
  for (const auto& comp : rep.hj.components) ctx.note(comp.name, comp.expr.to_string());
  ctx.add(Check::at_most("hj", rep.hj_norm, opt.hj_tolerance));
  ctx.add(Check::at_most("roundtrip", rep.roundtrip_norm, opt.roundtrip_tolerance));
  ctx.add(Check::holds("flat", rep.flat));
  if (rho) ctx.add(Check::holds("closed", rep.closed));
  ctx.add(Check::holds("consistent", rep.consistent()));
  if (g.theta.is_zero()) {
    ctx.add(Check::holds("theta_zero_hj_form",
                         (hj_form(section, g.hamiltonian, g.theta) - multisymplectic_hj_form(section, g.hamiltonian))
                             .is_zero()));
  }

  auto yn = [](bool b) { return std::string(b ? "1" : "0"); };
  std::string csv = "scenario,hj_norm,roundtrip_norm,symbolic_hj_zero,closed,flat,hj_holds,roundtrip_holds,consistent,samples\n";
  csv += csv_field(ctx.report.scenario) + "," + format_number(rep.hj_norm) + "," + format_number(rep.roundtrip_norm) + "," +
         yn(rep.symbolic_hj_zero) + "," + yn(rep.closed) + "," + yn(rep.flat) + "," + yn(rep.hj_holds) + "," +
         yn(rep.roundtrip_holds) + "," + yn(rep.consistent()) + "," + std::to_string(rep.samples) + "\n";
  ctx.write("hj.csv", csv);
  ctx.write("hj_report.txt", rep.to_text());
}

// ---------------------------------------------------------------------------

struct FieldExpressions {
  std::vector<Expr> sigma;
  std::vector<Expr> pt;
  std::vector<std::vector<Expr>> px;  ///< [i][a], i spatial
};

FieldState sample_fields(const ChartFamily& f, const FieldExpressions& e, int nodes, double t) {
  const int dims = f.m() - 1;
  const auto& base = *f.base;
  FieldState s = FieldState::zeros({dims, nodes}, f.n_fields());
  s.t = t;
  Point pt{{base.base_name(0), t}};
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    const auto y = s.grid.coordinate(k);
    for (int j = 0; j < dims; ++j) pt[base.base_name(j + 1)] = y[static_cast<std::size_t>(j)];
    for (std::size_t a = 0; a < e.sigma.size(); ++a) {
      s.sigma[a][k] = eval(e.sigma[a], pt);
      s.pt[a][k] = eval(e.pt[a], pt);
      for (std::size_t i = 0; i < e.px.size(); ++i) s.px[i][a][k] = eval(e.px[i][a], pt);
    }
  }
  return s;
}

std::vector<EmbeddingState> embed(const ChartFamily& f, const std::vector<FieldState>& states) {
  std::vector<EmbeddingState> out;
  out.reserve(states.size());
  for (const auto& s : states) out.emplace_back(f, s);
  return out;
}

ProbeKind probe_kind(const Config& cfg) {
  const std::string k = cfg.text("probes.kind", "vertical");
  if (k == "vertical") return ProbeKind::Vertical;
  if (k == "momentum") return ProbeKind::Momentum;
  if (k == "field") return ProbeKind::Field;
  throw ValidationError("probes.kind: expected vertical, momentum or field, got '" + k + "'");
}

std::string field_dump(const ChartFamily& f, const FieldState& s) {
  const auto& c = *f.dual_jet;
  const int dims = s.grid.n;
  std::vector<std::string> header{"t"};
  for (int j = 0; j < dims; ++j) header.push_back("i_" + c.base_name(j + 1));
  for (int j = 0; j < dims; ++j) header.push_back(c.base_name(j + 1));
  for (int a = 0; a < s.n_fields(); ++a) header.push_back("sigma_" + c.fiber_name(a));
  for (int a = 0; a < s.n_fields(); ++a) header.push_back(c.momentum_name(0, a));
  for (int j = 0; j < dims; ++j) {
    for (int a = 0; a < s.n_fields(); ++a) header.push_back(c.momentum_name(j + 1, a));
  }
  std::string out = join_names(header) + "\n";
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    std::vector<double> row{s.t};
    std::size_t rest = k;
    std::vector<double> index(static_cast<std::size_t>(dims));
    for (int j = dims - 1; j >= 0; --j) {
      index[static_cast<std::size_t>(j)] = static_cast<double>(rest % static_cast<std::size_t>(s.grid.nodes));
      rest /= static_cast<std::size_t>(s.grid.nodes);
    }
    row.insert(row.end(), index.begin(), index.end());
    const auto y = s.grid.coordinate(k);
    row.insert(row.end(), y.begin(), y.end());
    for (const auto& v : s.sigma) row.push_back(v[k]);
    for (const auto& v : s.pt) row.push_back(v[k]);
    for (const auto& comp : s.px) {
      for (const auto& v : comp) row.push_back(v[k]);
    }
    out += join_row(row) + "\n";
  }
  return out;
}

std::string dump_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fields_%04zu.csv", k);
  return buf;
}

void run_cauchy(const Context& ctx) {
  const Config& cfg = ctx.cfg;
  const ScenarioGeometry g = build_geometry(cfg);
  const ChartFamily& f = g.family;
  if (!f.base->time_sliced() || f.m() < 2) throw ValidationError("chart: cauchy scenarios need a time-sliced base with m >= 2");
  const auto dims = static_cast<std::size_t>(f.m() - 1);
  const auto n = static_cast<std::size_t>(f.n_fields());

  std::optional<FieldExpressions> exact;
  if (cfg.has("exact.sigma")) {
    FieldExpressions e{parse_exprs(cfg, "exact.sigma"), parse_exprs(cfg, "exact.pt"),
                       parse_expr_rows(cfg, "exact.px")};
    require_size("exact.sigma", e.sigma.size(), n);
    require_size("exact.pt", e.pt.size(), n);
    require_shape("exact.px", e.px, dims, n);
    exact = std::move(e);
  }

  const int nodes = cfg.integer("grid.nodes", 64);
  if (nodes < 4) throw ValidationError("grid.nodes: need at least 4 nodes");
  const double dx = 1.0 / nodes;
  const double cfl = cfg.number("grid.cfl", 0.5);
  const double t0 = cfg.number("run.t0", 0.0);
  const double t1 = cfg.number("run.t1", 0.1);
  const double dt = cfg.has("run.dt") ? cfg.number("run.dt") : cfl * dx;
  const int stride = cfg.integer("run.stride", 1);

  FieldState init;
  if (exact) {
    init = sample_fields(f, *exact, nodes, t0);
  } else {
    FieldExpressions e{parse_exprs(cfg, "initial.sigma"), parse_exprs(cfg, "initial.pt"), {}};
    require_size("initial.sigma", e.sigma.size(), n);
    require_size("initial.pt", e.pt.size(), n);
    e.px.assign(dims, std::vector<Expr>(n));
    init = sample_fields(f, e, nodes, t0);
    solve_spatial_momenta(g.hamiltonian, init);
  }

  const int probe_count = cfg.integer("probes.count", 8);
  const ProbeKind kind = probe_kind(cfg);
  const EmbeddingState init_state(f, init);
  const auto probes = make_probes(init_state, kind, probe_count, ctx.seed);

  const Residual pre = check_precosymplectic(g.hamiltonian, g.theta, init_state, probes);
  ctx.add(Check::at_most("eta", pre.at("eta").max_abs, ctx.tolerance("eta", 1e-12)));
  double probe_worst = 0.0;
  for (const auto& c : pre.components) {
    if (c.name != "eta") probe_worst = std::max(probe_worst, c.max_abs);
  }
  ctx.add(Check::at_most("precosymplectic", probe_worst, ctx.tolerance("precosymplectic", 1e-2)));

  const auto fields = integrate_cauchy(g.hamiltonian, g.theta, init, t1, dt, stride);
  const auto traj = embed(f, fields);
  const Residual inf = infinite_hdw_residual(traj, g.hamiltonian, g.theta, probes);
  ctx.add(Check::at_most("infinite_residual", inf.max_norm(), ctx.tolerance("infinite_residual", 1e-2)));

  if (exact) {
    double err = 0.0;
    std::vector<FieldState> samples;
    for (const auto& s : fields) {
      const FieldState ref = sample_fields(f, *exact, nodes, s.t);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t k = 0; k < s.grid.size(); ++k) {
          err = std::max({err, std::abs(s.sigma[a][k] - ref.sigma[a][k]), std::abs(s.pt[a][k] - ref.pt[a][k])});
        }
      }
      samples.push_back(ref);
    }
    ctx.add(Check::at_most("exact_error", err, ctx.tolerance("exact_error", 1e-2)));
    const Residual exact_inf = infinite_hdw_residual(embed(f, samples), g.hamiltonian, g.theta, probes);
    ctx.add(Check::at_most("exact_infinite_residual", exact_inf.max_norm(),
                           ctx.tolerance("exact_infinite_residual", 1e-2)));
  }

  if (cfg.has("hj.gamma")) {
    const auto gamma = parse_expr_rows(cfg, "hj.gamma");
    require_shape("hj.gamma", gamma, static_cast<std::size_t>(f.m()), n);
    const GammaSection section = in_field("hj.gamma", [&] { return GammaSection(f, gamma); });
    const auto r = hj_infinite_check(section, g.hamiltonian, g.theta, traj, probes);
    const double tol = ctx.tolerance("hj_infinite", 1e-8);
    ctx.add(Check::at_most("hj_infinite_pullback", r.pullback, tol));
    ctx.add(Check::at_most("hj_infinite_lift", r.lift, tol));
    ctx.add(Check::at_most("hj_infinite_coordinates", r.coordinate_gap, ctx.tolerance("hj_infinite_coordinates", 1e-12)));
  }

  const int levels = ctx.options.refine > 0 ? ctx.options.refine : cfg.integer("refine.levels", 0);
  if (levels > 0) {
    if (!exact) throw ValidationError("refine: the refinement ladder needs an [exact] solution");
    if (levels < 2) throw ValidationError("refine.levels: need at least 2 levels");
    const int base_nodes = cfg.integer("refine.nodes", nodes);
    const double t_ref = cfg.number("refine.t", t0);
    const int count = cfg.integer("refine.samples", 5);
    std::vector<double> dxs, pres, infs;
    std::string csv = "dx,nodes,precosymplectic,infinite\n";
    for (int level = 0; level < levels; ++level) {
      const int nk = base_nodes << level;
      const double dtk = cfl / nk;
      std::vector<FieldState> samples;
      for (int j = 0; j < count; ++j) samples.push_back(sample_fields(f, *exact, nk, t_ref + j * dtk));
      const auto states = embed(f, samples);
      const auto pk = make_probes(states.front(), kind, probe_count, ctx.seed);
      const Residual rp = check_precosymplectic(g.hamiltonian, g.theta, states[static_cast<std::size_t>(count / 2)], pk);
      double worst = 0.0;
      for (const auto& c : rp.components) {
        if (c.name != "eta") worst = std::max(worst, c.max_abs);
      }
      dxs.push_back(1.0 / nk);
      pres.push_back(worst);
      infs.push_back(infinite_hdw_residual(states, g.hamiltonian, g.theta, pk).max_norm());
      csv += format_number(dxs.back()) + "," + std::to_string(nk) + "," + format_number(pres.back()) + "," +
             format_number(infs.back()) + "\n";
    }
    const double window = ctx.tolerance("order", 0.3);
    for (int level = 0; level + 1 < levels; ++level) {
      const auto k = static_cast<std::size_t>(level);
      const std::string tag = "[" + std::to_string(base_nodes << level) + "]";
      ctx.add(Check::near("order_precosymplectic" + tag, std::log2(pres[k] / pres[k + 1]), 2.0, window));
      ctx.add(Check::near("order_infinite" + tag, std::log2(infs[k] / infs[k + 1]), 2.0, window));
    }
    ctx.write("refinement.csv", csv);
  }

  if (cfg.flag("output.dump_fields", true)) {
    for (std::size_t k = 0; k < fields.size(); ++k) ctx.write(dump_name(k), field_dump(f, fields[k]));
  }
}

// ---------------------------------------------------------------------------

void run_identity(const Context& ctx) {
  const int cases = ctx.cfg.integer("identity.cases", 50);
  if (cases < 1) throw ValidationError("identity.cases: need at least one case");
  std::string csv = "identity,cases,failures\n";
  for (const auto& r : run_identity_suite(ctx.seed, cases)) {
    ctx.add(Check::at_most(r.name, r.failures, 0.0));
    if (r.cases < cases) ctx.add(Check::holds(r.name + " cases", false));
    csv += csv_field(r.name) + "," + std::to_string(r.cases) + "," + std::to_string(r.failures) + "\n";
  }
  ctx.write("identities.csv", csv);
}

std::string bound_name(Check::Bound b) {
  switch (b) {
    case Check::Bound::AtMost: return "at_most";
    case Check::Bound::AtLeast: return "at_least";
    case Check::Bound::Near: return "near";
    case Check::Bound::Holds: return "holds";
  }
  return "";
}

}  // namespace

// ---------------------------------------------------------------------------

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError(path.string() + ": cannot open config");
  std::ostringstream os;
  os << is.rdbuf();
  return from_string(os.str(), path.string());
}

Config Config::from_string(const std::string& text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, c.tree_);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  return c;
}

bool Config::has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

std::string Config::text(const std::string& key) const {
  const auto v = tree_.get_optional<std::string>(key);
  if (!v) throw ValidationError(origin_ + ": missing required field '" + key + "'");
  return trim(*v);
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

double Config::number(const std::string& key) const { return parse_number(key, text(key)); }

double Config::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

int Config::integer(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const double v = number(key);
  if (v != std::floor(v) || std::abs(v) > std::numeric_limits<int>::max()) {
    throw ParseError(key + ": expected an integer, got '" + text(key) + "'");
  }
  return static_cast<int>(v);
}

bool Config::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = text(key);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ParseError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> Config::list(const std::string& key) const {
  auto items = split(text(key), ',');
  for (const auto& s : items) {
    if (s.empty()) throw ParseError(key + ": empty list entry");
  }
  return items;
}

std::vector<double> Config::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : list(key)) out.push_back(parse_number(key, s));
  return out;
}

std::vector<std::vector<double>> Config::rows(const std::string& key) const {
  std::vector<std::vector<double>> out;
  for (const auto& row : split(text(key), ';')) {
    std::vector<double> r;
    for (const auto& s : split(row, ',')) r.push_back(parse_number(key, s));
    out.push_back(std::move(r));
  }
  return out;
}

Check Check::at_most(std::string name, double value, double tolerance) {
  return {std::move(name), Bound::AtMost, value, tolerance, 0.0, std::isfinite(value) && value <= tolerance};
}

Check Check::at_least(std::string name, double value, double bound) {
  return {std::move(name), Bound::AtLeast, value, bound, 0.0, std::isfinite(value) && value >= bound};
}

Check Check::near(std::string name, double value, double target, double tolerance) {
  return {std::move(name), Bound::Near, value, tolerance, target,
          std::isfinite(value) && std::abs(value - target) <= tolerance};
}

Check Check::holds(std::string name, bool ok) {
  return {std::move(name), Bound::Holds, ok ? 1.0 : 0.0, 0.0, 0.0, ok};
}

std::string Check::describe() const {
  std::string out = (pass ? "PASS " : "FAIL ") + name;
  switch (bound) {
    case Bound::AtMost: return out + " value=" + format_number(value) + " <= " + format_number(tolerance);
    case Bound::AtLeast: return out + " value=" + format_number(value) + " >= " + format_number(tolerance);
    case Bound::Near:
      return out + " value=" + format_number(value) + " target=" + format_number(target) + " +- " +
             format_number(tolerance);
    case Bound::Holds: return out;
  }
  return out;
}

int RunReport::exit_code() const {
  switch (status) {
    case RunStatus::Pass: return 0;
    case RunStatus::CheckFailure: return 1;
    case RunStatus::ConfigError: return 2;
    case RunStatus::NumericAbort: return 3;
  }
  return 2;
}

std::string RunReport::to_text() const {
  static const char* names[] = {"pass", "check failure", "config error", "numeric abort"};
  std::ostringstream os;
  os << "scenario: " << scenario << "\n";
  os << "kind: " << kind << "\n";
  os << "status: " << names[static_cast<int>(status)] << "\n";
  if (!message.empty()) os << "message: " << message << "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", seconds);
  os << "seconds: " << buf << "\n";
  for (const auto& n : notes) os << n << "\n";
  for (const auto& c : checks) os << c.describe() << "\n";
  return os.str();
}

std::string RunReport::to_csv() const {
  std::string out = "name,bound,value,tolerance,target,pass\n";
  for (const auto& c : checks) {
    out += csv_field(c.name) + "," + bound_name(c.bound) + "," + format_number(c.value) + "," + format_number(c.tolerance) + "," +
           format_number(c.target) + "," + (c.pass ? "1" : "0") + "\n";
  }
  return out;
}

ScenarioGeometry build_geometry(const Config& cfg) {
  ChartLayout layout;
  const bool named_base = cfg.has("chart.base");
  const bool named_fiber = cfg.has("chart.fiber");
  const int m = cfg.integer("chart.m", named_base ? static_cast<int>(cfg.list("chart.base").size()) : 1);
  const int n = cfg.integer("chart.fields", named_fiber ? static_cast<int>(cfg.list("chart.fiber").size()) : 1);
  if (m < 1 || n < 1) throw ValidationError("chart: m and fields must be positive");
  layout = default_layout(m, n);
  if (named_base) {
    layout.base = cfg.list("chart.base");
    require_size("chart.base", layout.base.size(), static_cast<std::size_t>(m));
  }
  if (named_fiber) {
    layout.fiber = cfg.list("chart.fiber");
    require_size("chart.fiber", layout.fiber.size(), static_cast<std::size_t>(n));
  }
  if (cfg.has("chart.metric")) {
    layout.metric = parse_expr_rows(cfg, "chart.metric");
    require_shape("chart.metric", layout.metric, static_cast<std::size_t>(m), static_cast<std::size_t>(m));
  }
  if (cfg.has("chart.volume")) layout.volume = parse_expr("chart.volume", cfg.text("chart.volume"));
  if (cfg.has("chart.energy")) layout.energy = cfg.text("chart.energy");
  if (cfg.has("chart.momenta")) {
    for (const auto& row : split(cfg.text("chart.momenta"), ';')) layout.momenta.push_back(split(row, ','));
  }
  layout.time_sliced = cfg.flag("chart.time_sliced", false);
  ChartFamily family = in_field("chart", [&] { return ChartFamily::make(layout); });

  const std::string htext = cfg.text("hamiltonian.H", "scalar-field");
  HamiltonianData h = htext == "scalar-field"
                          ? in_field("hamiltonian.H", [&] { return scalar_field_hamiltonian(family); })
                          : in_field("hamiltonian.H", [&] { return HamiltonianData(family, parse(htext)); });

  LeeForm theta = LeeForm::zero(family);
  if (cfg.has("lee.theta")) {
    const std::vector<Expr> c = parse_exprs(cfg, "lee.theta");
    require_size("lee.theta", c.size(), static_cast<std::size_t>(m));
    theta = in_field("lee.theta", [&] {
      LeeForm t(family, c);
      t.require_closed();
      return t;
    });
  }
  return {std::move(family), std::move(h), std::move(theta)};
}

RunReport run_scenario(const Config& cfg, const RunOptions& options) {
  RunReport report;
  const auto start = std::chrono::steady_clock::now();
  auto fail = [&](RunStatus status, const std::string& what, const char* prefix) {
    report.status = status;
    report.message = std::string(prefix) + ": " + what;
  };
  try {
    report.kind = cfg.text("scenario.kind");
    report.scenario = cfg.text("scenario.name", std::filesystem::path(cfg.origin()).stem().string());
    std::uint64_t seed = 1;
    if (options.seed) {
      seed = *options.seed;
    } else if (cfg.has("scenario.seed")) {
      try {
        seed = std::stoull(cfg.text("scenario.seed"));
      } catch (const std::exception&) {
        throw ParseError("scenario.seed: expected an unsigned integer");
      }
    }
    const Context ctx{cfg, options, seed, report};
    if (report.kind == "mechanics") {
      run_mechanics(ctx);
    } else if (report.kind == "scalar-field") {
      run_scalar_field(ctx);
    } else if (report.kind == "hj-verify") {
      run_hj_verify(ctx);
    } else if (report.kind == "cauchy") {
      run_cauchy(ctx);
    } else if (report.kind == "identity-suite") {
      run_identity(ctx);
    } else {
      throw ValidationError("scenario.kind: unknown kind '" + report.kind + "'");
    }
  } catch (const NumericAbort& e) {
    fail(RunStatus::NumericAbort, e.what(), "numeric abort");
  } catch (const ParseError& e) {
    fail(RunStatus::ConfigError, e.what(), "parse error");
  } catch (const DomainError& e) {
    fail(RunStatus::NumericAbort, e.what(), "domain error");
  } catch (const Error& e) {
    fail(RunStatus::ConfigError, e.what(), "validation error");
  } catch (const std::filesystem::filesystem_error& e) {
    fail(RunStatus::ConfigError, e.what(), "i/o error");
  } catch (const std::runtime_error& e) {
    fail(RunStatus::ConfigError, e.what(), "i/o error");
  }
  if (report.status == RunStatus::Pass) {
    const bool ok = std::all_of(report.checks.begin(), report.checks.end(), [](const Check& c) { return c.pass; });
    if (!ok) report.status = RunStatus::CheckFailure;
    if (report.checks.empty()) {
      report.status = RunStatus::CheckFailure;
      report.message = "no checks ran";
    }
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (options.out_dir) {
    try {
      std::filesystem::create_directories(*options.out_dir);
      std::ofstream(*options.out_dir / "checks.csv", std::ios::binary) << report.to_csv();
      std::ofstream(*options.out_dir / "report.txt", std::ios::binary) << report.to_text();
    } catch (const std::exception& e) {
      if (report.status == RunStatus::Pass) fail(RunStatus::ConfigError, e.what(), "i/o error");
    }
  }
  return report;
}

RunReport run_scenario_file(const std::filesystem::path& path, const RunOptions& options) {
  try {
    return run_scenario(Config::load(path), options);
  } catch (const Error& e) {
    RunReport report;
    report.scenario = path.stem().string();
    report.status = RunStatus::ConfigError;
    report.message = std::string("parse error: ") + e.what();
    return report;
  }
}

}  // namespace lcms
