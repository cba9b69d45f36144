#include "nsldp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "nsldp/dynamics.hpp"
#include "nsldp/errors.hpp"
#include "nsldp/io.hpp"
#include "nsldp/ldp.hpp"
#include "nsldp/parallel.hpp"
#include "nsldp/presets.hpp"
#include "nsldp/stats.hpp"

#ifndef NSLDP_VERSION
#define NSLDP_VERSION "0.0.0"
#endif

namespace nsldp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names = {
      {ExperimentKind::ou_checks, "ou_checks"}, {ExperimentKind::renorm, "renorm"},
      {ExperimentKind::lemma_ca50, "lemma_ca50"}, {ExperimentKind::lemma_a1, "lemma_a1"},
      {ExperimentKind::theorem1, "theorem1"},   {ExperimentKind::theorem2, "theorem2"},
      {ExperimentKind::instanton, "instanton"}, {ExperimentKind::laplace, "laplace"},
      {ExperimentKind::tube, "tube"}};
  return names;
}

json field_source(const std::string& preset, double amplitude, int seed) {
  return {{"preset", preset}, {"amplitude", amplitude}, {"seed", seed}, {"file", ""}};
}

json control_source() {
  return {{"preset", "random_low"}, {"amplitude", 1.0}, {"seed", 77}, {"profile", "one_plus_sine"}};
}

json optimizer_defaults() {
  return {{"penalty", 10.0},      {"endpoint_tol", 1e-3},       {"max_iterations", 500},
          {"rel_tol", 1e-8},      {"max_penalty_doublings", 16}};
}

json base_defaults() {
  return {
      {"schema_version", kSchemaVersion},
      {"kind", ""},
      {"numerics",
       {{"N", 16}, {"dt", 5e-3}, {"T", 0.5}, {"grid_factor", 2}, {"dealias", "two_thirds"},
        {"scheme", "exponential_euler"}, {"nonlinear", true}}},
      {"noise",
       {{"epsilon", 0.1}, {"delta", nullptr}, {"gamma", 1.0},
        {"schedule", {{"coefficient", 1.0}, {"exponent", 1.0}}}, {"eta", 1.0}, {"alpha", 0.0}}},
      {"statistics", {{"replicas", 32}, {"seed", 1}}},
      {"io", {{"output_dir", "runs"}, {"dump_trajectories", false}, {"dump_fields", false}, {"dump_diagnostics", false}}},
  };
}

json params_defaults(ExperimentKind k) {
  const json initial = field_source("shear_mix", 1.0, 0);
  const json eps4 = json::array({1e-1, 1e-2, 1e-3, 1e-4});
  switch (k) {
    case ExperimentKind::ou_checks:
      return {{"alphas", json::array({0.0, 1.0})}, {"step_dt", 0.05}};
    case ExperimentKind::renorm:
      return {{"deltas", json::array({1e-1, 1e-2})}, {"cutoffs", json::array({128, 256})}, {"tail_tol", 1e-8},
              {"wick_delta", 0.1}, {"sigma", -0.5}, {"epsilons", json::array({1e-1, 1e-2, 1e-3})}};
    case ExperimentKind::lemma_ca50:
      return {{"p", 2.0}, {"t", 0.1}, {"deltas", eps4}};
    case ExperimentKind::lemma_a1:
      return {{"sigma", -0.5}, {"sigma_prime", -0.25}, {"p", 4.0}, {"kappa", 2.0}, {"steps", 10},
              {"epsilons", json::array({1e-1, 1e-2, 1e-3})}, {"lambda_cutoff", 256}};
    case ExperimentKind::theorem1:
      return {{"epsilons", eps4}, {"initial", initial}, {"control", control_source()},
              {"allow_scaling_violation", false}};
    case ExperimentKind::theorem2:
      return {{"epsilons", eps4}, {"initial", initial}, {"control", control_source()}, {"sigma", -0.25}, {"p", 4.0},
              {"alpha", 0.4}, {"beta", 2.5}, {"theta", 1.0}};
    case ExperimentKind::instanton: {
      json t = field_source("random_low", 0.5, 3);
      t["free_decay"] = false;
      return {{"initial", initial}, {"target", t}, {"optimizer", optimizer_defaults()}};
    }
    case ExperimentKind::laplace: {
      json t = field_source("random_low", 0.5, 3);
      return {{"initial", initial},
              {"functional", {{"kind", "clipped_endpoint"}, {"constant", 0.0}, {"clip", 1.0}, {"target", t}}},
              {"epsilons", json::array({1e-1, 5e-2, 2e-2})},
              {"family_points", 6},
              {"optimizer", optimizer_defaults()}};
    }
    case ExperimentKind::tube:
      return {{"initial", initial}, {"radii", json::array({0.05, 0.1, 0.2, 0.5})}};
  }
  return json::object();
}

json acceptance_defaults(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::ou_checks:
      return {{"max_variance_rel_error", 0.05}, {"ks_significance", 0.01}};
    case ExperimentKind::renorm:
      return {{"max_cutoff_difference", 1e-8}, {"max_zero_mode_sigmas", 3.0}, {"require_decreasing", true}};
    case ExperimentKind::lemma_ca50:
      return {{"closed_form_tol", 0.05}, {"max_ratio_variation", 3.0}};
    case ExperimentKind::lemma_a1:
      return {{"max_ratio_variation", 10.0}};
    case ExperimentKind::theorem1:
    case ExperimentKind::theorem2:
      return {{"require_decreasing", true}};
    case ExperimentKind::instanton:
      return {{"max_endpoint_error", 1e-3}, {"require_converged", true}};
    case ExperimentKind::laplace:
      return {{"max_gap", nullptr}};
    case ExperimentKind::tube:
      return {{"require_monotone", true}};
  }
  return json::object();
}

/// Overlay `user` on `defaults`, rejecting unknown keys and type mismatches.
json merge(const json& defaults, const json& user, const std::string& where) {
  if (!user.is_object()) throw ConfigError("'" + where + "' must be an object");
  json out = defaults;
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = where.empty() ? it.key() : where + "." + it.key();
    if (!defaults.contains(it.key())) throw ConfigError("unknown key '" + path + "'");
    const json& d = defaults.at(it.key());
    const json& v = it.value();
    if (d.is_object()) {
      out[it.key()] = merge(d, v, path);
    } else if (d.is_null()) {
      if (!v.is_null() && !v.is_number()) throw ConfigError("'" + path + "' must be a number or null");
      out[it.key()] = v.is_null() ? json(nullptr) : json(v.get<double>());
    } else if (d.is_boolean()) {
      if (!v.is_boolean()) throw ConfigError("'" + path + "' must be a boolean");
      out[it.key()] = v;
    } else if (d.is_string()) {
      if (!v.is_string()) throw ConfigError("'" + path + "' must be a string");
      out[it.key()] = v;
    } else if (d.is_number_integer() || d.is_number_unsigned()) {
      if (!v.is_number_integer()) throw ConfigError("'" + path + "' must be an integer");
      out[it.key()] = v;
    } else if (d.is_number()) {
      if (!v.is_number()) throw ConfigError("'" + path + "' must be a number");
      out[it.key()] = v.get<double>();
    } else if (d.is_array()) {
      if (!v.is_array() || v.empty()) throw ConfigError("'" + path + "' must be a non-empty array");
      const bool ints = !d.empty() && d.front().is_number_integer();
      json arr = json::array();
      for (const auto& e : v) {
        if (ints ? !e.is_number_integer() : !e.is_number())
          throw ConfigError("'" + path + "' must hold " + std::string(ints ? "integers" : "numbers"));
        arr.push_back(ints ? e : json(e.get<double>()));
      }
      out[it.key()] = arr;
    }
  }
  return out;
}

std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::vector<double> doubles(const json& arr) { return arr.get<std::vector<double>>(); }

// ---- building blocks from config sections ----

IntegratorConfig integrator(const ExperimentConfig& cfg) {
  const json& n = cfg.numerics();
  IntegratorConfig ic;
  ic.dt = n.at("dt").get<double>();
  ic.scheme = scheme_from_string(n.at("scheme").get<std::string>());
  ic.dealias = n.at("dealias").get<std::string>() == "none" ? DealiasRule::none() : DealiasRule::two_thirds();
  ic.nonlinear = n.at("nonlinear").get<bool>();
  ic.grid_factor = n.at("grid_factor").get<int>();
  ic.record_diagnostics = cfg.io().at("dump_diagnostics").get<bool>();
  return ic;
}

DeltaSchedule schedule(const ExperimentConfig& cfg) {
  const json& s = cfg.noise().at("schedule");
  return {s.at("coefficient").get<double>(), s.at("exponent").get<double>()};
}

NoiseSpec noise_at(const ExperimentConfig& cfg, double epsilon) {
  NoiseSpec spec = NoiseSpec::scheduled(epsilon, cfg.noise().at("gamma").get<double>(), schedule(cfg),
                                        cfg.noise().at("eta").get<double>());
  if (!cfg.noise().at("delta").is_null()) spec.delta = cfg.noise().at("delta").get<double>();
  return spec;
}

NoiseSpec base_noise(const ExperimentConfig& cfg) { return noise_at(cfg, cfg.noise().at("epsilon").get<double>()); }

FamilySpec family(const ExperimentConfig& cfg, const json& epsilons) {
  FamilySpec f;
  f.epsilons = doubles(epsilons);
  f.gamma = cfg.noise().at("gamma").get<double>();
  f.schedule = schedule(cfg);
  f.eta = cfg.noise().at("eta").get<double>();
  f.replicas = cfg.replicas();
  return f;
}

int cutoff(const ExperimentConfig& cfg) { return cfg.numerics().at("N").get<int>(); }
double horizon(const ExperimentConfig& cfg) { return cfg.numerics().at("T").get<double>(); }

SpectralField load_source(const json& src, int n) {
  const std::string file = src.at("file").get<std::string>();
  if (!file.empty()) {
    SpectralField u = read_field(file);
    if (u.cutoff() != n) throw DimensionError("field file '" + file + "' has a different cutoff");
    return u;
  }
  return make_preset(src.at("preset").get<std::string>(), n, src.at("seed").get<std::uint64_t>(),
                     src.at("amplitude").get<double>());
}

ControlPath make_control(const json& src, int n, double dt, double horizon) {
  const SpectralField shape =
      make_preset(src.at("preset").get<std::string>(), n, src.at("seed").get<std::uint64_t>(),
                  src.at("amplitude").get<double>());
  const std::string profile = src.at("profile").get<std::string>();
  std::function<double(double)> g;
  if (profile == "constant") g = [](double) { return 1.0; };
  else if (profile == "one_plus_sine") g = [](double t) { return 1.0 + std::sin(2.0 * std::numbers::pi * t); };
  else if (profile == "cosine") g = [](double t) { return std::cos(std::numbers::pi * t); };
  else throw ConfigError("unknown control profile '" + profile + "'");
  return ControlPath::sampled([&](double t) { return g(t) * shape; }, dt, step_count(horizon, dt));
}

OptimizerSettings optimizer(const json& o) {
  OptimizerSettings s;
  s.penalty = o.at("penalty").get<double>();
  s.endpoint_tol = o.at("endpoint_tol").get<double>();
  s.max_iterations = o.at("max_iterations").get<int>();
  s.rel_tol = o.at("rel_tol").get<double>();
  s.max_penalty_doublings = o.at("max_penalty_doublings").get<int>();
  return s;
}

// ---- results ----

struct Row {
  std::string quantity;
  double epsilon = kNaN;
  double delta = kNaN;
  double estimate = kNaN;
  double bound = kNaN;
  double ratio = kNaN;
  double stderr_ = kNaN;
};

struct Outputs {
  std::vector<Row> rows;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, std::string>> extra_files;  // name, content
  json summary = json::object();
};

void check(Outputs& out, const std::string& name, double value, double threshold, bool pass) {
  out.checks.push_back({name, value, threshold, pass});
}

std::string rows_to_csv(const std::vector<Row>& rows) {
  std::string s = "quantity,epsilon,delta,estimate,bound,ratio,stderr\n";
  for (const auto& r : rows)
    s += r.quantity + "," + format_double(r.epsilon) + "," + format_double(r.delta) + "," + format_double(r.estimate) +
         "," + format_double(r.bound) + "," + format_double(r.ratio) + "," + format_double(r.stderr_) + "\n";
  return s;
}

void convergence_rows(Outputs& out, const ConvergenceReport& rep, const std::string& quantity, bool required) {
  for (std::size_t i = 0; i < rep.epsilons.size(); ++i)
    out.rows.push_back({quantity, rep.epsilons[i], rep.deltas[i], rep.distances[i], kNaN, kNaN, rep.stderrs[i]});
  const double two_se = 2.0 * rep.fit.slope_stderr;
  out.rows.push_back({quantity + "_slope", kNaN, kNaN, rep.fit.slope, two_se, rep.fit.slope / two_se, rep.fit.slope_stderr});
  if (required) check(out, quantity + " decreasing (slope > 2 se)", rep.fit.slope, two_se, rep.decreasing());
  out.summary["slope"] = rep.fit.slope;
  out.summary["slope_stderr"] = rep.fit.slope_stderr;
}

std::string trajectory_name(const std::string& stem) { return stem + ".nslt"; }

// ---- kinds ----

Outputs run_ou_checks(const ExperimentConfig& cfg, const RngStream& rng) {
  Outputs out;
  const NoiseSpec spec = base_noise(cfg);
  const double tol = cfg.acceptance().at("max_variance_rel_error").get<double>();
  const double sig = cfg.acceptance().at("ks_significance").get<double>();
  std::string modes = "alpha,k1,k2,empirical,expected\n";
  int idx = 0;
  for (double alpha : doubles(cfg.params().at("alphas"))) {
    const auto rep = ou_law_check(cutoff(cfg), spec, alpha, cfg.params().at("step_dt").get<double>(), cfg.replicas(),
                                  rng.substream(std::uint64_t(idx++)));
    out.rows.push_back({"mode_variance_max_rel_error[alpha=" + label(alpha) + "]", spec.epsilon, spec.delta,
                        rep.max_rel_error, tol, rep.max_rel_error / tol, 1.0 / std::sqrt(double(cfg.replicas()))});
    out.rows.push_back({"ks_pvalue[alpha=" + label(alpha) + "]", spec.epsilon, spec.delta, rep.ks_pvalue, sig,
                        rep.ks_pvalue / sig, kNaN});
    check(out, "mode variances within tolerance, alpha=" + label(alpha), rep.max_rel_error, tol,
          rep.max_rel_error <= tol);
    check(out, "ou_step preserves stationarity, alpha=" + label(alpha), rep.ks_pvalue, sig, rep.ks_pvalue > sig);
    for (std::size_t i = 0; i < rep.modes.size(); ++i)
      modes += format_double(alpha) + "," + std::to_string(rep.modes[i].k1) + "," + std::to_string(rep.modes[i].k2) +
               "," + format_double(rep.empirical[i]) + "," + format_double(rep.expected[i]) + "\n";
  }
  out.extra_files.push_back({"modes.csv", modes});
  return out;
}

Outputs run_renorm(const ExperimentConfig& cfg, const RngStream& rng) {
  Outputs out;
  const json& p = cfg.params();
  const json& acc = cfg.acceptance();
  const double gamma = cfg.noise().at("gamma").get<double>();
  const auto cutoffs = p.at("cutoffs").get<std::vector<int>>();
  const double tail_tol = p.at("tail_tol").get<double>();
  const double agree = acc.at("max_cutoff_difference").get<double>();
  for (double delta : doubles(p.at("deltas"))) {
    std::vector<double> values;
    for (int c : cutoffs) {
      const auto est = renorm_constant(delta, gamma, c, tail_tol);
      values.push_back(est.value);
      out.rows.push_back({"theta[cutoff=" + std::to_string(c) + "]", kNaN, delta, est.value, kNaN, kNaN, est.error_estimate});
      out.rows.push_back({"theta_lattice_sum[cutoff=" + std::to_string(c) + "]", kNaN, delta, est.lattice_sum, kNaN, kNaN, kNaN});
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double spread = *hi - *lo;
    out.rows.push_back({"theta_cutoff_spread", kNaN, delta, spread, agree, spread / agree, kNaN});
    check(out, "theta agrees across cutoffs, delta=" + label(delta), spread, agree, spread <= agree);
    const auto sums = renorm_lattice_sum(delta, gamma, cutoffs.front());
    const double asym = std::abs(sums.k1_weighted - sums.k2_weighted);
    out.rows.push_back({"theta_k1_k2_asymmetry", kNaN, delta, asym, 0.0, kNaN, kNaN});
    check(out, "k1 <-> k2 symmetry exact, delta=" + label(delta), asym, 0.0, asym == 0.0);
  }

  NoiseSpec spec = base_noise(cfg);
  spec.delta = p.at("wick_delta").get<double>();
  const DealiasRule rule = integrator(cfg).dealias;
  const auto w = wick_zero_mode_check(cutoff(cfg), spec, rule, cfg.replicas(), rng.substream(0));
  const double sigmas = acc.at("max_zero_mode_sigmas").get<double>();
  for (const auto& [name, ms] : {std::pair{"wick_zero_mode_11", w.d11}, {"wick_zero_mode_22", w.d22}, {"wick_zero_mode_12", w.off12}}) {
    const double z = std::abs(ms.mean) / ms.stderr_;
    out.rows.push_back({name, spec.epsilon, spec.delta, ms.mean, sigmas, z, ms.stderr_});
    check(out, std::string(name) + " mean consistent with 0", z, sigmas, z <= sigmas);
  }
  const auto conv = renormalized_square_convergence(cutoff(cfg), family(cfg, p.at("epsilons")), p.at("sigma").get<double>(),
                                                    rule, rng.substream(1));
  convergence_rows(out, conv, "wick_square_norm", acc.at("require_decreasing").get<bool>());
  return out;
}

Outputs run_lp_moment(const ExperimentConfig& cfg, const RngStream& rng) {
  Outputs out;
  const double p = cfg.params().at("p").get<double>();
  const double t = cfg.params().at("t").get<double>();
  const double tol = cfg.acceptance().at("closed_form_tol").get<double>();
  const double maxvar = cfg.acceptance().at("max_ratio_variation").get<double>();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  int idx = 0;
  for (double delta : doubles(cfg.params().at("deltas"))) {
    NoiseSpec spec = base_noise(cfg);
    spec.delta = delta;
    const auto rep = lp_log_moment_check(cutoff(cfg), spec, p, t, cfg.replicas(), rng.substream(std::uint64_t(idx++)),
                                         cfg.noise().at("alpha").get<double>(), cfg.numerics().at("grid_factor").get<int>());
    out.rows.push_back({"lp_moment", spec.epsilon, delta, rep.estimate, rep.bound, rep.ratio, rep.stderr_});
    lo = std::min(lo, rep.ratio);
    hi = std::max(hi, rep.ratio);
    if (!std::isnan(rep.closed_form)) {
      const double err = std::abs(rep.estimate / rep.closed_form - 1.0);
      out.rows.push_back({"l2_closed_form", spec.epsilon, delta, rep.closed_form, kNaN, rep.estimate / rep.closed_form, kNaN});
      check(out, "Monte Carlo matches closed form, delta=" + label(delta), err, tol, err <= tol);
    }
  }
  out.rows.push_back({"ratio_variation", kNaN, kNaN, hi / lo, maxvar, hi / lo / maxvar, kNaN});
  check(out, "ratio to (eps log((1+delta)/delta))^{p/2} bounded", hi / lo, maxvar, hi / lo < maxvar);
  return out;
}

Outputs run_besov_moment(const ExperimentConfig& cfg, const RngStream& rng) {
  Outputs out;
  const json& p = cfg.params();
  const double maxvar = cfg.acceptance().at("max_ratio_variation").get<double>();
  const double gamma = cfg.noise().at("gamma").get<double>();
  const double eta = cfg.noise().at("eta").get<double>();
  const double beta = beta_for_eta(eta, gamma);
  double blo = std::numeric_limits<double>::infinity(), bhi = 0.0, llo = blo, lhi = 0.0;
  int idx = 0;
  for (double eps : doubles(p.at("epsilons"))) {
    const NoiseSpec spec = noise_at(cfg, eps);
    const auto rep = besov_moment_check(cutoff(cfg), spec, p.at("sigma").get<double>(), p.at("sigma_prime").get<double>(),
                                        p.at("p").get<double>(), p.at("kappa").get<double>(), horizon(cfg),
                                        p.at("steps").get<int>(), cfg.replicas(), rng.substream(std::uint64_t(idx++)),
                                        cfg.noise().at("alpha").get<double>(), cfg.numerics().at("grid_factor").get<int>());
    out.rows.push_back({"besov_moment", eps, spec.delta, rep.estimate, rep.bound, rep.ratio, rep.stderr_});
    blo = std::min(blo, rep.ratio);
    bhi = std::max(bhi, rep.ratio);
    const auto lam = lambda_beta_bound(spec, beta, p.at("lambda_cutoff").get<int>());
    const double scale = eps * std::pow(spec.delta, -eta);
    out.rows.push_back({"lambda_beta", eps, spec.delta, lam.value, scale, lam.value / scale, kNaN});
    llo = std::min(llo, lam.value / scale);
    lhi = std::max(lhi, lam.value / scale);
  }
  check(out, "Besov moment ratio bounded across eps", bhi / blo, maxvar, bhi / blo < maxvar);
  check(out, "Lambda_beta / (eps delta^-eta) bounded across eps", lhi / llo, maxvar, lhi / llo < maxvar);
  out.summary["beta_eta"] = beta;
  return out;
}

Outputs run_theorem(const ExperimentConfig& cfg, const RngStream& rng, bool besov_metric, const fs::path& dir) {
  Outputs out;
  const json& p = cfg.params();
  const IntegratorConfig ic = integrator(cfg);
  const int n = cutoff(cfg);
  const SpectralField u0 = load_source(p.at("initial"), n);
  const ControlPath phi = make_control(p.at("control"), n, ic.dt, horizon(cfg));
  const FamilySpec fam = family(cfg, p.at("epsilons"));
  ConvergenceReport rep;
  if (besov_metric) {
    const BesovParams b{p.at("sigma").get<double>(), p.at("p").get<double>(), p.at("alpha").get<double>(),
                        p.at("beta").get<double>()};
    rep = convergence_theorem2(u0, phi, b, p.at("theta").get<double>(), fam, ic, rng, ic.grid_factor);
  } else {
    rep = convergence_theorem1(u0, phi, fam, ic, rng, p.at("allow_scaling_violation").get<bool>());
  }
  convergence_rows(out, rep, besov_metric ? "sup_besov_distance" : "sup_h_distance",
                   cfg.acceptance().at("require_decreasing").get<bool>());
  const bool dump_traj = cfg.io().at("dump_trajectories").get<bool>();
  const bool dump_diag = cfg.io().at("dump_diagnostics").get<bool>();
  if (dump_traj || dump_diag) {
    const Trajectory ref = solve_skeleton(u0, phi, ic);
    if (dump_traj) write_trajectory_binary(dir / trajectory_name("skeleton"), ref);
    if (dump_diag) out.extra_files.push_back({"skeleton_diagnostics.csv", diagnostics_to_csv(ref)});
  }
  if (cfg.io().at("dump_fields").get<bool>()) out.extra_files.push_back({"initial.csv", field_to_csv(u0)});
  return out;
}

Outputs run_instanton(const ExperimentConfig& cfg, const fs::path& dir) {
  Outputs out;
  const json& p = cfg.params();
  const IntegratorConfig ic = integrator(cfg);
  const int n = cutoff(cfg);
  const double T = horizon(cfg);
  const SpectralField u0 = load_source(p.at("initial"), n);
  SpectralField target = p.at("target").at("free_decay").get<bool>()
                             ? solve_skeleton(u0, ControlPath::zero(n, ic.dt, step_count(T, ic.dt)), ic).final_state()
                             : load_source(p.at("target"), n);
  const auto res = minimize_action(u0, target, T, ic, optimizer(p.at("optimizer")));
  const double oracle = ic.nonlinear ? kNaN : linear_minimum_action(u0, target, T);
  out.rows.push_back({"action", kNaN, kNaN, res.report.value, oracle, res.report.value / oracle, kNaN});
  out.rows.push_back({"objective", kNaN, kNaN, res.objective, kNaN, kNaN, kNaN});
  const double tol = cfg.acceptance().at("max_endpoint_error").get<double>();
  out.rows.push_back({"endpoint_error", kNaN, kNaN, res.endpoint_error, tol, res.endpoint_error / tol, kNaN});
  out.rows.push_back({"penalty", kNaN, kNaN, res.penalty, kNaN, kNaN, kNaN});
  out.rows.push_back({"iterations", kNaN, kNaN, double(res.iterations), kNaN, kNaN, kNaN});
  check(out, "endpoint reached", res.endpoint_error, tol, res.endpoint_error <= tol);
  if (cfg.acceptance().at("require_converged").get<bool>())
    check(out, "optimizer converged", res.converged ? 1.0 : 0.0, 1.0, res.converged);
  out.summary["converged"] = res.converged;
  if (cfg.io().at("dump_trajectories").get<bool>()) write_trajectory_binary(dir / trajectory_name("instanton"), res.path);
  if (cfg.io().at("dump_fields").get<bool>()) {
    out.extra_files.push_back({"initial.csv", field_to_csv(u0)});
    out.extra_files.push_back({"target.csv", field_to_csv(target)});
  }
  if (cfg.io().at("dump_diagnostics").get<bool>())
    out.extra_files.push_back({"instanton_diagnostics.csv", diagnostics_to_csv(solve_skeleton(u0, res.phi_star, ic))});
  return out;
}

Outputs run_laplace(const ExperimentConfig& cfg, const RngStream& rng) {
  Outputs out;
  const json& p = cfg.params();
  const IntegratorConfig ic = integrator(cfg);
  const int n = cutoff(cfg);
  const SpectralField u0 = load_source(p.at("initial"), n);
  const json& f = p.at("functional");
  LaplaceFunctional gamma;
  const std::string kind = f.at("kind").get<std::string>();
  if (kind == "zero") gamma.kind = LaplaceFunctional::Kind::zero;
  else if (kind == "constant") gamma.kind = LaplaceFunctional::Kind::constant;
  else if (kind == "clipped_endpoint") gamma.kind = LaplaceFunctional::Kind::clipped_endpoint;
  else throw ConfigError("unknown functional kind '" + kind + "'");
  gamma.constant = f.at("constant").get<double>();
  gamma.clip = f.at("clip").get<double>();
  gamma.target = load_source(f.at("target"), n);
  const auto rep = laplace_check(u0, gamma, horizon(cfg), family(cfg, p.at("epsilons")), ic, rng,
                                 optimizer(p.at("optimizer")), p.at("family_points").get<int>());
  for (const auto& r : rep.rows) {
    out.rows.push_back({"laplace_lhs", r.epsilon, r.delta, r.lhs, r.rhs, r.lhs / r.rhs, r.lhs_stderr});
    out.rows.push_back({"laplace_gap", r.epsilon, r.delta, r.gap, kNaN, kNaN, r.lhs_stderr});
    out.rows.push_back({"laplace_ess", r.epsilon, r.delta, r.ess, kNaN, r.flagged ? 1.0 : 0.0, kNaN});
  }
  for (std::size_t i = 0; i < rep.family_s.size(); ++i)
    out.rows.push_back({"laplace_rhs_family[s=" + label(rep.family_s[i]) + "]", kNaN, kNaN, rep.family_values[i],
                        kNaN, kNaN, kNaN});
  const json& max_gap = cfg.acceptance().at("max_gap");
  if (!max_gap.is_null()) {
    const double g = rep.rows.back().gap;
    check(out, "gap at smallest eps", g, max_gap.get<double>(), g <= max_gap.get<double>());
  }
  json flags = json::array();
  for (const auto& r : rep.rows) flags.push_back(r.flagged);
  out.summary["low_ess_flags"] = flags;
  return out;
}

Outputs run_tube(const ExperimentConfig& cfg, const RngStream& rng) {
  Outputs out;
  const json& p = cfg.params();
  const IntegratorConfig ic = integrator(cfg);
  const int n = cutoff(cfg);
  const SpectralField u0 = load_source(p.at("initial"), n);
  const Trajectory center = solve_skeleton(u0, ControlPath::zero(n, ic.dt, step_count(horizon(cfg), ic.dt)), ic);
  const NoiseSpec spec = base_noise(cfg);
  const auto rows = tube_probability(u0, center, doubles(p.at("radii")), spec, cfg.replicas(), ic, rng);
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string tag = "[r=" + label(r.radius) + "]";
    const double se = std::sqrt(r.p_hat * (1.0 - r.p_hat) / double(r.trials));
    out.rows.push_back({"tube_probability" + tag, spec.epsilon, spec.delta, r.p_hat, kNaN, kNaN, se});
    out.rows.push_back({"tube_ci_low" + tag, spec.epsilon, spec.delta, r.ci_low ? *r.ci_low : kNaN, kNaN, kNaN, kNaN});
    out.rows.push_back({"tube_ci_high" + tag, spec.epsilon, spec.delta, r.ci_high, kNaN, kNaN, kNaN});
    for (std::size_t j = 0; j < rows.size(); ++j)
      if (rows[j].radius > r.radius && rows[j].hits < r.hits) monotone = false;
  }
  if (cfg.acceptance().at("require_monotone").get<bool>())
    check(out, "tube probability nondecreasing in radius", monotone ? 1.0 : 0.0, 1.0, monotone);
  return out;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json check_json(const Check& c) {
  return {{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}};
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kind_names())
    if (kind == k) return name;
  return "unknown";
}

ExperimentKind kind_from_string(const std::string& name) {
  for (const auto& [kind, n] : kind_names())
    if (n == name) return kind;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

std::string toolkit_version() { return NSLDP_VERSION; }

ExperimentConfig config_from_json(const json& user) {
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  if (!user.contains("kind") || !user.at("kind").is_string()) throw ConfigError("config needs a string 'kind'");
  if (user.contains("schema_version") &&
      (!user.at("schema_version").is_number_integer() || user.at("schema_version").get<int>() != kSchemaVersion))
    throw ConfigError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  ExperimentConfig cfg;
  cfg.kind = kind_from_string(user.at("kind").get<std::string>());
  json defaults = base_defaults();
  defaults["params"] = params_defaults(cfg.kind);
  defaults["acceptance"] = acceptance_defaults(cfg.kind);
  cfg.doc = merge(defaults, user, "");
  const json& n = cfg.doc.at("numerics");
  if (n.at("N").get<int>() < 2) throw ConfigError("numerics.N must be at least 2");
  if (!(n.at("dt").get<double>() > 0.0)) throw ConfigError("numerics.dt must be positive");
  if (!(n.at("T").get<double>() > 0.0)) throw ConfigError("numerics.T must be positive");
  if (n.at("grid_factor").get<int>() < 2) throw ConfigError("numerics.grid_factor must be at least 2");
  const std::string dealias = n.at("dealias").get<std::string>();
  if (dealias != "two_thirds" && dealias != "none") throw ConfigError("numerics.dealias must be two_thirds or none");
  scheme_from_string(n.at("scheme").get<std::string>());
  if (cfg.replicas() < 1) throw ConfigError("statistics.replicas must be positive");
  return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(doc);
}

ExperimentConfig load_config(const fs::path& path) { return parse_config(read_file(path)); }

void validate(const ExperimentConfig& cfg) {
  const json& p = cfg.params();
  const int n = cutoff(cfg);
  switch (cfg.kind) {
    case ExperimentKind::ou_checks:
      if (cfg.replicas() < 2) throw ValidationError("replicas >= 2", "ou_checks");
      break;
    case ExperimentKind::renorm:
      if (!(cfg.noise().at("gamma").get<double>() > 0.0)) throw ValidationError("gamma > 0", "renorm");
      for (double d : doubles(p.at("deltas")))
        if (!(d > 0.0)) throw ValidationError("delta > 0", "theta_delta diverges at delta = 0");
      break;
    case ExperimentKind::lemma_ca50:
      if (cfg.replicas() < 100) throw ValidationError("replicas >= 100", "lemma_ca50");
      for (double d : doubles(p.at("deltas")))
        if (!(d > 0.0)) throw ValidationError("delta > 0", "log((1+delta)/delta) needs delta > 0");
      break;
    case ExperimentKind::lemma_a1: {
      const double s = p.at("sigma").get<double>(), sp = p.at("sigma_prime").get<double>();
      if (!(s < sp && sp < 0.0)) throw ValidationError("sigma < sigma' < 0", "sigma = " + format_double(s) + ", sigma' = " + format_double(sp));
      const double beta = beta_for_eta(cfg.noise().at("eta").get<double>(), cfg.noise().at("gamma").get<double>());
      if (!(beta > 0.0 && beta < 0.25)) throw ValidationError("beta_eta = eta gamma / 2 in (0, 1/4)", "beta_eta = " + format_double(beta));
      break;
    }
    case ExperimentKind::theorem1:
      if (!p.at("allow_scaling_violation").get<bool>()) validate_theorem1(family(cfg, p.at("epsilons")));
      break;
    case ExperimentKind::theorem2:
      validate_theorem2(family(cfg, p.at("epsilons")),
                        {p.at("sigma").get<double>(), p.at("p").get<double>(), p.at("alpha").get<double>(),
                         p.at("beta").get<double>()},
                        p.at("theta").get<double>());
      break;
    case ExperimentKind::instanton:
      break;
    case ExperimentKind::laplace:
      for (double e : doubles(p.at("epsilons")))
        if (!(e > 0.0)) throw ValidationError("epsilon > 0", "laplace");
      break;
    case ExperimentKind::tube:
      if (cfg.replicas() < 1000) throw ValidationError("replicas >= 1000", "tube");
      for (double r : doubles(p.at("radii")))
        if (!(r > 0.0)) throw ValidationError("radius > 0", "tube");
      break;
  }
  if (cfg.kind == ExperimentKind::theorem1 || cfg.kind == ExperimentKind::theorem2 ||
      cfg.kind == ExperimentKind::instanton || cfg.kind == ExperimentKind::laplace || cfg.kind == ExperimentKind::tube)
    step_count(horizon(cfg), cfg.numerics().at("dt").get<double>());
  (void)n;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) {
  json canon = cfg.doc;
  canon["io"].erase("output_dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canon.dump())));
  return buf;
}

RunRecord run(const ExperimentConfig& cfg, const std::optional<fs::path>& output_root) {
  validate(cfg);
  RunRecord rec;
  rec.kind = to_string(cfg.kind);
  rec.config_hash = config_hash(cfg);
  rec.version = toolkit_version();
  rec.seed = cfg.seed();
  rec.started = utc_now();
  const fs::path root = output_root ? *output_root : fs::path(cfg.io().at("output_dir").get<std::string>());
  const fs::path dir = root / (rec.kind + "-" + rec.config_hash.substr(0, 12));
  fs::create_directories(dir);
  rec.output_dir = dir.string();

  const RngStream rng(cfg.seed());
  for (int r = 0; r < cfg.replicas(); ++r) rec.replica_seeds.push_back(rng.substream(std::uint64_t(r)).seed());

  Outputs out;
  switch (cfg.kind) {
    case ExperimentKind::ou_checks: out = run_ou_checks(cfg, rng); break;
    case ExperimentKind::renorm: out = run_renorm(cfg, rng); break;
    case ExperimentKind::lemma_ca50: out = run_lp_moment(cfg, rng); break;
    case ExperimentKind::lemma_a1: out = run_besov_moment(cfg, rng); break;
    case ExperimentKind::theorem1: out = run_theorem(cfg, rng, false, dir); break;
    case ExperimentKind::theorem2: out = run_theorem(cfg, rng, true, dir); break;
    case ExperimentKind::instanton: out = run_instanton(cfg, dir); break;
    case ExperimentKind::laplace: out = run_laplace(cfg, rng); break;
    case ExperimentKind::tube: out = run_tube(cfg, rng); break;
  }

  const fs::path results = dir / "results.csv";
  atomic_write(results, rows_to_csv(out.rows));
  rec.result_files.push_back(results.string());
  for (const auto& [name, content] : out.extra_files) {
    atomic_write(dir / name, content);
    rec.result_files.push_back((dir / name).string());
  }
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".nslt") rec.result_files.push_back(entry.path().string());

  rec.checks = out.checks;
  rec.pass = std::all_of(out.checks.begin(), out.checks.end(), [](const Check& c) { return c.pass; });

  json summary = {{"schema_version", kSchemaVersion},
                  {"kind", rec.kind},
                  {"config_hash", rec.config_hash},
                  {"seed", rec.seed},
                  {"config", cfg.doc},
                  {"checks", json::array()},
                  {"metrics", out.summary},
                  {"pass", rec.pass}};
  for (const auto& c : out.checks) summary["checks"].push_back(check_json(c));
  const fs::path summary_path = dir / "summary.json";
  atomic_write(summary_path, summary.dump(2) + "\n");
  rec.result_files.push_back(summary_path.string());

  rec.finished = utc_now();
  json record = {{"kind", rec.kind},
                 {"config_hash", rec.config_hash},
                 {"version", rec.version},
                 {"started", rec.started},
                 {"finished", rec.finished},
                 {"seed", rec.seed},
                 {"replica_seeds", rec.replica_seeds},
                 {"result_files", rec.result_files},
                 {"pass", rec.pass}};
  atomic_write(dir / "record.json", record.dump(2) + "\n");
  return rec;
}

ExperimentConfig with_value(const ExperimentConfig& base, const std::string& axis, const json& value) {
  json doc = base.doc;
  json* node = &doc;
  const auto parts = split(axis, '.');
  if (parts.empty()) throw ConfigError("empty sweep axis");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object() || !node->contains(parts[i])) throw ConfigError("sweep axis '" + axis + "' does not resolve");
    node = &(*node)[parts[i]];
  }
  if (!node->is_object() || !node->contains(parts.back())) throw ConfigError("sweep axis '" + axis + "' does not resolve");
  (*node)[parts.back()] = value;
  return config_from_json(doc);
}

SweepResult sweep(const ExperimentConfig& base, const std::string& axis, const std::vector<json>& values,
                  const std::optional<fs::path>& output_root, int workers) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  with_value(base, axis, values.front());
  SweepResult res;
  res.members.resize(values.size());
  const fs::path root = output_root ? *output_root : fs::path(base.io().at("output_dir").get<std::string>());
  parallel_for(
      int(values.size()),
      [&](int i) {
        try {
          res.members[i] = run(with_value(base, axis, values[i]), root);
        } catch (const std::exception& e) {
          res.members[i].kind = to_string(base.kind);
          res.members[i].error = e.what();
          res.members[i].pass = false;
        }
      },
      workers);
  std::string merged = "member,axis_value,quantity,epsilon,delta,estimate,bound,ratio,stderr\n";
  json members = json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& m = res.members[i];
    members.push_back({{"axis_value", values[i]}, {"config_hash", m.config_hash}, {"output_dir", m.output_dir},
                       {"pass", m.pass}, {"error", m.error}});
    if (!m.error.empty()) continue;
    std::istringstream in(read_file(fs::path(m.output_dir) / "results.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) merged += std::to_string(i) + "," + values[i].dump() + "," + line + "\n";
  }
  json key = {{"base", config_hash(base)}, {"axis", axis}, {"values", values}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(key.dump())));
  const fs::path dir = root / ("sweep-" + std::string(buf).substr(0, 12));
  atomic_write(dir / "sweep.csv", merged);
  atomic_write(dir / "sweep.json", json{{"axis", axis}, {"members", members}}.dump(2) + "\n");
  res.merged_csv = merged;
  res.pass = std::all_of(res.members.begin(), res.members.end(), [](const RunRecord& r) { return r.pass; });
  return res;
}

ReportDocument report(const std::vector<fs::path>& run_dirs, const std::optional<fs::path>& out) {
  if (run_dirs.empty()) throw ConfigError("report needs at least one run directory");
  ReportDocument doc;
  std::vector<json> summaries;
  for (const auto& d : run_dirs) {
    summaries.push_back(json::parse(read_file(d / "summary.json")));
    const std::string kind = summaries.back().at("kind").get<std::string>();
    if (doc.kind.empty()) doc.kind = kind;
    else if (kind != doc.kind) throw ConfigError("report cannot mix kinds '" + doc.kind + "' and '" + kind + "'");
  }
  const ExperimentKind kind = kind_from_string(doc.kind);
  // Primary series per kind: (quantity prefix, x column, y column).
  std::string prefix = "sup_h_distance";
  int xcol = 1, ycol = 3;
  switch (kind) {
    case ExperimentKind::theorem2: prefix = "sup_besov_distance"; break;
    case ExperimentKind::renorm: prefix = "wick_square_norm"; break;
    case ExperimentKind::lemma_ca50: prefix = "lp_moment"; xcol = 2; ycol = 5; break;
    case ExperimentKind::lemma_a1: prefix = "besov_moment"; ycol = 5; break;
    case ExperimentKind::ou_checks: prefix = "mode_variance_max_rel_error"; break;
    case ExperimentKind::instanton: prefix = "action"; break;
    case ExperimentKind::laplace: prefix = "laplace_gap"; break;
    case ExperimentKind::tube: prefix = "tube_probability"; break;
    default: break;
  }
  std::vector<double> xs, ys, ses;
  doc.csv = "run,x,y,stderr\n";
  std::ostringstream text;
  text << "kind: " << doc.kind << "\nruns: " << run_dirs.size() << "\n";
  doc.pass = true;
  for (std::size_t i = 0; i < run_dirs.size(); ++i) {
    const json& s = summaries[i];
    const bool pass = s.at("pass").get<bool>();
    doc.pass = doc.pass && pass;
    text << "\n[" << s.at("config_hash").get<std::string>() << "] " << (pass ? "PASS" : "FAIL") << "\n";
    for (const auto& c : s.at("checks"))
      text << "  " << (c.at("pass").get<bool>() ? "pass" : "FAIL") << "  " << c.at("name").get<std::string>()
           << ": value " << label(c.at("value").is_null() ? kNaN : c.at("value").get<double>()) << ", threshold "
           << label(c.at("threshold").is_null() ? kNaN : c.at("threshold").get<double>()) << "\n";
    std::istringstream in(read_file(run_dirs[i] / "results.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto cols = split(line, ',');
      if (cols.size() < 7 || cols[0].rfind(prefix, 0) != 0 || cols[0].find("_slope") != std::string::npos) continue;
      const double x = std::stod(cols[xcol]), y = std::stod(cols[ycol]), se = std::stod(cols[6]);
      doc.csv += std::to_string(i) + "," + format_double(x) + "," + format_double(y) + "," + format_double(se) + "\n";
      xs.push_back(x);
      ys.push_back(y);
      ses.push_back(std::isfinite(se) ? se : 0.0);
    }
  }
  const auto fit = stats::loglog_slope(xs, ys, {});
  text << "\nseries " << prefix << ": " << xs.size() << " points";
  if (std::isfinite(fit.slope_stderr)) text << ", log-log slope " << label(fit.slope) << " +- " << label(fit.slope_stderr);
  text << "\noverall: " << (doc.pass ? "PASS" : "FAIL") << "\n";
  doc.text = text.str();
  if (out) {
    atomic_write(*out / "report.csv", doc.csv);
    atomic_write(*out / "report.txt", doc.text);
  }
  return doc;
}

}  // namespace nsldp
