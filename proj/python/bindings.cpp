#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nsldp/dynamics.hpp"
#include "nsldp/errors.hpp"
#include "nsldp/harness.hpp"
#include "nsldp/io.hpp"
#include "nsldp/ldp.hpp"
#include "nsldp/noise.hpp"
#include "nsldp/presets.hpp"

namespace py = pybind11;
using namespace nsldp;

namespace {

DealiasRule rule_from(const std::string& name) {
  if (name == "two_thirds") return DealiasRule::two_thirds();
  if (name == "none") return DealiasRule::none();
  throw std::invalid_argument("dealias must be 'two_thirds' or 'none'");
}

/// Coefficients as a (2N+1, 2N+1) complex array indexed [k1 + N, k2 + N].
py::array_t<cplx> to_array(const SpectralField& u) {
  const int side = lattice_side(u.cutoff());
  py::array_t<cplx> out({side, side});
  auto c = u.coefficients();
  std::copy(c.begin(), c.end(), out.mutable_data());
  return out;
}

SpectralField from_array(py::array_t<cplx, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1) || a.shape(0) % 2 == 0)
    throw DimensionError("expected a square (2N+1, 2N+1) array");
  SpectralField u(int(a.shape(0)) / 2);
  auto c = u.mutable_coefficients();
  std::copy(a.data(), a.data() + a.size(), c.begin());
  c[lattice_index(u.cutoff(), 0, 0)] = 0.0;
  return u;
}

py::dict record_dict(const RunRecord& r) {
  py::dict d;
  d["kind"] = r.kind;
  d["config_hash"] = r.config_hash;
  d["output_dir"] = r.output_dir;
  d["started"] = r.started;
  d["finished"] = r.finished;
  d["version"] = r.version;
  d["seed"] = r.seed;
  d["result_files"] = r.result_files;
  d["pass"] = r.pass;
  py::list checks;
  for (const auto& c : r.checks) {
    py::dict e;
    e["name"] = c.name;
    e["value"] = c.value;
    e["threshold"] = c.threshold;
    e["pass"] = c.pass;
    checks.append(e);
  }
  d["checks"] = checks;
  return d;
}

}  // namespace

PYBIND11_MODULE(_nsldp, m) {
  m.doc() = "Galerkin stochastic Navier-Stokes solver and large-deviation experiments";
  m.attr("__version__") = toolkit_version();

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IntegrationError>(m, "IntegrationError", PyExc_RuntimeError);
  py::register_exception<TailToleranceError>(m, "TailToleranceError", PyExc_RuntimeError);

  py::class_<SpectralField>(m, "SpectralField")
      .def(py::init<int>(), py::arg("cutoff"))
      .def_property_readonly("cutoff", &SpectralField::cutoff)
      .def("__getitem__", [](const SpectralField& u, std::pair<int, int> k) { return u(k.first, k.second); })
      .def("set_real", [](SpectralField& u, std::pair<int, int> k, cplx c) { u.set_real({k.first, k.second}, c); })
      .def("is_real", &SpectralField::is_real, py::arg("rel_tol") = 1e-13)
      .def("to_array", &to_array)
      .def_static("from_array", &from_array)
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(double() * py::self)
      .def(py::self == py::self);

  m.def("h_norm", &h_norm);
  m.def("v_norm", &v_norm);
  m.def("sobolev_norm", &sobolev_norm, py::arg("u"), py::arg("s"));
  m.def("lp_norm", &lp_norm, py::arg("u"), py::arg("p"), py::arg("grid_factor") = 2);
  m.def("besov_norm", &besov_norm, py::arg("u"), py::arg("sigma"), py::arg("p"), py::arg("grid_factor") = 2);
  m.def("stokes_apply", &stokes_apply);
  m.def("heat_semigroup", &heat_semigroup, py::arg("u"), py::arg("t"), py::arg("alpha") = 0.0);
  m.def("real_inner", &real_inner);
  m.def(
      "b", [](const SpectralField& u, const std::string& dealias) { return b_self(u, rule_from(dealias)); },
      py::arg("u"), py::arg("dealias") = "two_thirds");
  m.def(
      "b_bilinear",
      [](const SpectralField& u, const SpectralField& v, const std::string& dealias) {
        return b_bilinear(u, v, rule_from(dealias));
      },
      py::arg("u"), py::arg("v"), py::arg("dealias") = "two_thirds");

  m.def("make_preset", &make_preset, py::arg("name"), py::arg("cutoff"), py::arg("seed") = 0,
        py::arg("amplitude") = 1.0);
  m.def(
      "random_field",
      [](int cutoff, std::uint64_t seed, double kmax, double decay) {
        RngStream rng(seed);
        return random_field(cutoff, rng, kmax, decay);
      },
      py::arg("cutoff"), py::arg("seed"), py::arg("max_wavenumber"), py::arg("decay") = 1.0);

  py::class_<DeltaSchedule>(m, "DeltaSchedule")
      .def(py::init<double, double>(), py::arg("coefficient") = 1.0, py::arg("exponent") = 1.0)
      .def_readwrite("coefficient", &DeltaSchedule::coefficient)
      .def_readwrite("exponent", &DeltaSchedule::exponent)
      .def("__call__", &DeltaSchedule::operator());

  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def(py::init([](double epsilon, double delta, double gamma) {
             NoiseSpec s;
             s.epsilon = epsilon;
             s.delta = delta;
             s.gamma = gamma;
             return s;
           }),
           py::arg("epsilon") = 0.0, py::arg("delta") = 0.0, py::arg("gamma") = 1.0)
      .def_static("scheduled", &NoiseSpec::scheduled, py::arg("epsilon"), py::arg("gamma"), py::arg("schedule"),
                  py::arg("eta") = 1.0)
      .def_readwrite("epsilon", &NoiseSpec::epsilon)
      .def_readwrite("delta", &NoiseSpec::delta)
      .def_readwrite("gamma", &NoiseSpec::gamma)
      .def_readwrite("eta", &NoiseSpec::eta);

  m.def(
      "ou_stationary_sample",
      [](int cutoff, const NoiseSpec& spec, double alpha, std::uint64_t seed) {
        RngStream rng(seed);
        return ou_stationary_sample(cutoff, spec, alpha, rng);
      },
      py::arg("cutoff"), py::arg("spec"), py::arg("alpha"), py::arg("seed"));
  m.def("ou_mean_energy", &ou_mean_energy, py::arg("cutoff"), py::arg("spec"), py::arg("alpha") = 0.0);
  m.def(
      "renorm_constant",
      [](double delta, double gamma, int cutoff, double tail_tol) {
        return renorm_constant(delta, gamma, cutoff, tail_tol).value;
      },
      py::arg("delta"), py::arg("gamma") = 1.0, py::arg("cutoff") = 256, py::arg("tail_tol") = 1e-8);

  py::class_<IntegratorConfig>(m, "IntegratorConfig")
      .def(py::init([](double dt, const std::string& scheme, const std::string& dealias, bool nonlinear) {
             IntegratorConfig c;
             c.dt = dt;
             c.scheme = scheme_from_string(scheme);
             c.dealias = rule_from(dealias);
             c.nonlinear = nonlinear;
             return c;
           }),
           py::arg("dt") = 1e-3, py::arg("scheme") = "exponential_euler", py::arg("dealias") = "two_thirds",
           py::arg("nonlinear") = true)
      .def_readwrite("dt", &IntegratorConfig::dt)
      .def_readwrite("nonlinear", &IntegratorConfig::nonlinear)
      .def_readwrite("record_diagnostics", &IntegratorConfig::record_diagnostics);

  py::class_<ControlPath>(m, "ControlPath")
      .def_static("zero", &ControlPath::zero, py::arg("cutoff"), py::arg("dt"), py::arg("steps"))
      .def_static("constant", &ControlPath::constant, py::arg("phi"), py::arg("dt"), py::arg("steps"))
      .def_static("sampled", &ControlPath::sampled, py::arg("phi"), py::arg("dt"), py::arg("steps"))
      .def_property_readonly("steps", &ControlPath::steps)
      .def_readonly("dt", &ControlPath::dt)
      .def_readonly("values", &ControlPath::values)
      .def("l2_norm_squared", &ControlPath::l2_norm_squared);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("dt", &Trajectory::dt)
      .def_readonly("states", &Trajectory::states)
      .def_property_readonly("steps", &Trajectory::steps)
      .def_property_readonly("final_state", &Trajectory::final_state)
      .def("h_norms", [](const Trajectory& t) {
        std::vector<double> out;
        for (const auto& s : t.states) out.push_back(h_norm(s));
        return out;
      });

  m.def("step_count", &step_count);
  m.def("solve_skeleton", &solve_skeleton, py::arg("u0"), py::arg("phi"), py::arg("cfg"));
  m.def(
      "solve_stochastic",
      [](const SpectralField& u0, const NoiseSpec& spec, double horizon, const IntegratorConfig& cfg,
         std::uint64_t seed) { return solve_stochastic(u0, spec, horizon, cfg, RngStream(seed)); },
      py::arg("u0"), py::arg("spec"), py::arg("horizon"), py::arg("cfg"), py::arg("seed"));
  m.def(
      "solve_controlled",
      [](const SpectralField& u0, const ControlPath& phi, const NoiseSpec& spec, const IntegratorConfig& cfg,
         std::uint64_t seed) { return solve_controlled(u0, phi, spec, cfg, RngStream(seed)); },
      py::arg("u0"), py::arg("phi"), py::arg("spec"), py::arg("cfg"), py::arg("seed"));
  m.def(
      "action", [](const Trajectory& f, const std::string& dealias) { return action(f, rule_from(dealias)).value; },
      py::arg("path"), py::arg("dealias") = "two_thirds");
  m.def("linear_minimum_action", &linear_minimum_action);
  m.def(
      "minimize_action",
      [](const SpectralField& u0, const SpectralField& target, double horizon, const IntegratorConfig& cfg,
         double endpoint_tol, int max_iterations) {
        OptimizerSettings opt;
        opt.endpoint_tol = endpoint_tol;
        opt.max_iterations = max_iterations;
        const auto r = minimize_action(u0, target, horizon, cfg, opt);
        py::dict d;
        d["action"] = r.report.value;
        d["endpoint_error"] = r.endpoint_error;
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        d["phi"] = r.phi_star;
        d["path"] = r.path;
        return d;
      },
      py::arg("u0"), py::arg("target"), py::arg("horizon"), py::arg("cfg"), py::arg("endpoint_tol") = 1e-3,
      py::arg("max_iterations") = 500);

  m.def("field_to_csv", &field_to_csv);
  m.def("field_from_csv", &field_from_csv);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_property_readonly("kind", [](const ExperimentConfig& c) { return to_string(c.kind); })
      .def("to_json", [](const ExperimentConfig& c) { return c.doc.dump(); });
  m.def("parse_config", &parse_config);
  m.def("validate", &validate);
  m.def("config_hash", &config_hash);
  m.def(
      "run",
      [](const ExperimentConfig& cfg, std::optional<std::filesystem::path> root) {
        RunRecord r;
        {
          py::gil_scoped_release release;
          r = run(cfg, root);
        }
        return record_dict(r);
      },
      py::arg("cfg"), py::arg("output_root") = std::nullopt);
}
