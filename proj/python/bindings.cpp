#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lcms/errors.hpp"
#include "lcms/hj.hpp"
#include "lcms/identities.hpp"
#include "lcms/scenario.hpp"

namespace py = pybind11;
using namespace lcms;

namespace {

std::vector<Expr> parse_all(const std::vector<std::string>& text) {
  std::vector<Expr> out;
  for (const auto& s : text) out.push_back(parse(s));
  return out;
}

std::vector<std::vector<Expr>> parse_rows(const std::vector<std::vector<std::string>>& text) {
  std::vector<std::vector<Expr>> out;
  for (const auto& row : text) out.push_back(parse_all(row));
  return out;
}

ChartFamily make_chart(const std::vector<std::string>& base, const std::vector<std::string>& fiber,
                       const std::vector<std::vector<std::string>>& metric, bool time_sliced) {
  ChartLayout l;
  l.base = base;
  l.fiber = fiber;
  l.metric = parse_rows(metric);
  l.time_sliced = time_sliced;
  return ChartFamily::make(l);
}

HamiltonianData make_hamiltonian(const ChartFamily& f, const std::string& h) {
  return h == "scalar-field" ? scalar_field_hamiltonian(f) : HamiltonianData(f, parse(h));
}

LeeForm make_lee(const ChartFamily& f, const std::vector<std::string>& theta) {
  if (theta.empty()) return LeeForm::zero(f);
  LeeForm t(f, parse_all(theta));
  t.require_closed();
  return t;
}

py::dict residual_dict(const Residual& r) {
  py::dict out;
  for (const auto& c : r.components) {
    if (r.symbolic) {
      out[py::str(c.name)] = c.expr.to_string();
    } else {
      out[py::str(c.name)] = c.max_abs;
    }
  }
  return out;
}

py::dict report_dict(const RunReport& r) {
  py::list checks;
  for (const auto& c : r.checks) {
    py::dict d;
    d["name"] = c.name;
    d["value"] = c.value;
    d["tolerance"] = c.tolerance;
    d["pass"] = c.pass;
    checks.append(d);
  }
  py::dict out;
  out["scenario"] = r.scenario;
  out["kind"] = r.kind;
  out["pass"] = r.pass();
  out["exit_code"] = r.exit_code();
  out["message"] = r.message;
  out["seconds"] = r.seconds;
  out["checks"] = checks;
  out["text"] = r.to_text();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Locally conformal multisymplectic field theory: symbolic checks, integrators and scenarios.";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericAbort>(m, "NumericAbort", PyExc_ArithmeticError);

  py::class_<Expr>(m, "Expr")
      .def(py::init([](const std::string& text) { return parse(text); }))
      .def("is_zero", &Expr::is_zero)
      .def("diff", [](const Expr& e, const std::string& var) { return diff(e, var); })
      .def("eval", [](const Expr& e, const std::map<std::string, double>& at) {
        return eval(e, Point(at.begin(), at.end()));
      })
      .def("__str__", &Expr::to_string)
      .def("__repr__", [](const Expr& e) { return "Expr('" + e.to_string() + "')"; })
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(py::self * py::self)
      .def(py::self == py::self);
  m.def("parse", &parse, py::arg("text"));

  py::class_<ChartFamily>(m, "ChartFamily")
      .def(py::init(&make_chart), py::arg("base"), py::arg("fiber"), py::arg("metric") = std::vector<std::vector<std::string>>{},
           py::arg("time_sliced") = false)
      .def_static("default", [](int mdim, int n) { return ChartFamily::make(default_layout(mdim, n)); }, py::arg("m"),
                  py::arg("fields"))
      .def_property_readonly("m", &ChartFamily::m)
      .def_property_readonly("n_fields", &ChartFamily::n_fields)
      .def_property_readonly("dual_jet_coordinates", [](const ChartFamily& f) { return f.dual_jet->names(); });

  py::class_<HamiltonianData>(m, "Hamiltonian")
      .def(py::init(&make_hamiltonian), py::arg("family"), py::arg("H") = "scalar-field")
      .def("__str__", [](const HamiltonianData& h) { return h.expr().to_string(); });

  py::class_<LeeForm>(m, "LeeForm")
      .def(py::init(&make_lee), py::arg("family"), py::arg("theta") = std::vector<std::string>{})
      .def("is_zero", &LeeForm::is_zero)
      .def("is_closed", &LeeForm::is_closed);

  m.def(
      "lchdw_residual",
      [](const ChartFamily& f, const HamiltonianData& h, const LeeForm& theta, const std::vector<std::string>& sigma,
         const std::vector<std::vector<std::string>>& momenta) {
        return residual_dict(lchdw_residual(field_section(f, parse_all(sigma), parse_rows(momenta)), h, theta));
      },
      py::arg("family"), py::arg("hamiltonian"), py::arg("theta"), py::arg("sigma"), py::arg("momenta"),
      "Symbolic lcHDW residual of a section given by sigma[a] and momenta[i][a].");

  m.def(
      "connection_residual_is_zero",
      [](const HamiltonianData& h, const LeeForm& theta) {
        return check_connection_condition(connection_from_hamiltonian(h, theta), h, theta).is_zero();
      },
      py::arg("hamiltonian"), py::arg("theta"));

  m.def(
      "integrate_mechanics",
      [](const HamiltonianData& h, const LeeForm& theta, const std::vector<double>& sigma0,
         const std::vector<double>& p0, double t0, double t1, double dt) {
        const MechTrajectory tr = integrate_mechanics(h, theta, sigma0, p0, t0, t1, dt);
        py::dict out;
        out["t"] = tr.t;
        out["sigma"] = tr.sigma;
        out["p"] = tr.p;
        return out;
      },
      py::arg("hamiltonian"), py::arg("theta"), py::arg("sigma0"), py::arg("p0"), py::arg("t0") = 0.0,
      py::arg("t1") = 1.0, py::arg("dt") = 1e-3);

  m.def(
      "mechanics_closed_form",
      [](double theta, double sigma0, double p0, double duration) {
        const auto c = mechanics_closed_form(theta, sigma0, p0, duration);
        return py::make_tuple(c.sigma, c.p);
      },
      py::arg("theta"), py::arg("sigma0"), py::arg("p0"), py::arg("duration"));

  m.def(
      "hj_residual",
      [](const ChartFamily& f, const HamiltonianData& h, const LeeForm& theta,
         const std::vector<std::vector<std::string>>& gamma) {
        return residual_dict(hj_residual(GammaSection(f, parse_rows(gamma)), h, theta));
      },
      py::arg("family"), py::arg("hamiltonian"), py::arg("theta"), py::arg("gamma"));

  m.def(
      "roundtrip_verify",
      [](const ChartFamily& f, const HamiltonianData& h, const LeeForm& theta,
         const std::vector<std::vector<std::string>>& gamma, const std::vector<std::vector<double>>& initial,
         double start, double stop, double step) {
        RoundtripOptions opt;
        opt.initial = initial;
        opt.start = start;
        opt.stop = stop;
        opt.step = step;
        const HJReport r = roundtrip_verify(GammaSection(f, parse_rows(gamma)), h, theta, opt);
        py::dict out;
        out["hj_norm"] = r.hj_norm;
        out["roundtrip_norm"] = r.roundtrip_norm;
        out["hj_holds"] = r.hj_holds;
        out["roundtrip_holds"] = r.roundtrip_holds;
        out["flat"] = r.flat;
        out["consistent"] = r.consistent();
        out["samples"] = r.samples;
        return out;
      },
      py::arg("family"), py::arg("hamiltonian"), py::arg("theta"), py::arg("gamma"), py::arg("initial"),
      py::arg("start") = 0.0, py::arg("stop") = 1.0, py::arg("step") = 1e-3);

  m.def(
      "run_identity_suite",
      [](std::uint64_t seed, int cases) {
        py::list out;
        for (const auto& r : run_identity_suite(seed, cases)) {
          py::dict d;
          d["name"] = r.name;
          d["cases"] = r.cases;
          d["failures"] = r.failures;
          d["pass"] = r.pass();
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 1, py::arg("cases") = 50);

  m.def(
      "run_scenario",
      [](const std::filesystem::path& config, std::optional<std::filesystem::path> out, std::optional<std::uint64_t> seed,
         double tolerance_scale, int refine) {
        RunOptions opt;
        opt.out_dir = std::move(out);
        opt.seed = seed;
        opt.tolerance_scale = tolerance_scale;
        opt.refine = refine;
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run_scenario_file(config, opt);
        }
        return report_dict(r);
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(), py::arg("tolerance_scale") = 1.0,
      py::arg("refine") = 0, "Runs a scenario config; returns the report as a dict.");

  m.def(
      "run_scenario_text",
      [](const std::string& text, std::optional<std::uint64_t> seed) {
        RunOptions opt;
        opt.seed = seed;
        return report_dict(run_scenario(Config::from_string(text), opt));
      },
      py::arg("text"), py::arg("seed") = py::none());
}
