#include "nsldp/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "nsldp/errors.hpp"
#include "nsldp/transform.hpp"

namespace nsldp {

namespace {

/// h * phi_2(-lambda h) = (exp(-lambda h) - 1 + lambda h) / (lambda^2 h).
double h_phi2(double lambda, double h) {
  const double z = -lambda * h;
  if (std::abs(z) < 1e-3) return h * (0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0);
  return (std::expm1(z) - z) / (z * z) * h;
}

/// Per-mode exponential integrator multipliers for exp(h (A - alpha)).
struct Propagator {
  int cutoff;
  std::vector<double> decay;   // exp(-lambda h)
  std::vector<double> psi1;    // (1 - exp(-lambda h)) / lambda
  std::vector<double> psi2;    // h phi_2(-lambda h)

  Propagator(int n, double h, double alpha = 0.0)
      : cutoff(n), decay(lattice_size(n), 0.0), psi1(lattice_size(n), 0.0), psi2(lattice_size(n), 0.0) {
    for_each_wavenumber(n, [&](Wavenumber k) {
      const std::size_t i = lattice_index(n, k.k1, k.k2);
      const double lambda = k.norm2() + alpha;
      decay[i] = std::exp(-lambda * h);
      psi1[i] = -std::expm1(-lambda * h) / lambda;
      psi2[i] = h_phi2(lambda, h);
    });
  }

  SpectralField euler(const SpectralField& u, const SpectralField& n) const {
    SpectralField out(cutoff);
    auto o = out.mutable_coefficients();
    auto a = u.coefficients();
    auto b = n.coefficients();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = decay[i] * a[i] + psi1[i] * b[i];
    return out;
  }

  void correct(SpectralField& a, const SpectralField& n_end, const SpectralField& n_start) const {
    auto o = a.mutable_coefficients();
    auto e = n_end.coefficients();
    auto s = n_start.coefficients();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += psi2[i] * (e[i] - s[i]);
  }
};

/// Generic exponential step; rhs(w, end) evaluates the non-Stokes part at the start
/// (end = false) or end (end = true) of the step.
template <class Rhs>
SpectralField exp_step(const Propagator& prop, Scheme scheme, const SpectralField& u, Rhs&& rhs) {
  const SpectralField n0 = rhs(u, false);
  SpectralField a = prop.euler(u, n0);
  if (scheme == Scheme::etd2) prop.correct(a, rhs(a, true), n0);
  return a;
}

SpectralField drift(const SpectralField& u, const SpectralField& forcing, const IntegratorConfig& cfg) {
  SpectralField n = cfg.nonlinear ? b_self(u, cfg.dealias) : SpectralField(u.cutoff());
  n += forcing;
  return n;
}

void check_state(const SpectralField& u, double t, double blowup) {
  const double h = h_norm(u);
  if (!std::isfinite(h)) throw IntegrationError("non-finite state", t);
  if (h > blowup) throw IntegrationError("blowup: |u|_H = " + std::to_string(h), t);
}

void check_grid(double path_dt, const IntegratorConfig& cfg) {
  if (!(path_dt > 0.0)) throw DomainError("time step must be positive");
  if (std::abs(path_dt - cfg.dt) > 1e-12 * cfg.dt)
    throw DomainError("control grid dt does not match integrator dt");
}

DiagnosticRow diagnostic_row(const SpectralField& u, double t, int grid_factor) {
  DiagnosticRow r;
  r.t = t;
  r.h_norm = h_norm(u);
  r.v_norm = v_norm(u);
  r.l4_norm = lp_norm(u, 4.0, grid_factor);
  return r;
}

double energy_budget(const SpectralField& u0, const SpectralField& u1, const SpectralField& forcing, double h) {
  const double de = 0.5 * (real_inner(u1, u1) - real_inner(u0, u0));
  const double dissipation = 0.5 * h * (std::pow(v_norm(u0), 2) + std::pow(v_norm(u1), 2));
  const double work = 0.5 * h * (real_inner(forcing, u0) + real_inner(forcing, u1));
  return de + dissipation - work;
}

TrajectoryMetadata make_metadata(const NoiseSpec* spec, std::uint64_t seed, Scheme scheme) {
  TrajectoryMetadata m;
  if (spec) {
    m.epsilon = spec->epsilon;
    m.delta = spec->delta;
  }
  m.seed = seed;
  m.scheme = to_string(scheme);
  return m;
}

/// Shared driver for skeleton, stochastic and controlled runs. `forcing` already carries
/// any Q^{1/2} weighting. Noise is injected after the deterministic step when enabled.
Trajectory integrate(const SpectralField& u0, const ControlPath& forcing, const NoiseSpec* spec,
                     const IntegratorConfig& cfg, const RngStream* rng) {
  check_grid(forcing.dt, cfg);
  if (forcing.cutoff() != u0.cutoff()) throw DimensionError("control and initial state cutoffs differ");
  const int n = u0.cutoff();
  const double h = forcing.dt;
  const Propagator prop(n, h);
  const bool noisy = spec && rng && spec->epsilon != 0.0 && cfg.noise;
  RngStream stream = rng ? *rng : RngStream(0);

  Trajectory traj;
  traj.dt = h;
  traj.metadata = make_metadata(spec, rng ? rng->seed() : 0, cfg.scheme);
  traj.states.reserve(forcing.values.size());
  traj.states.push_back(u0);
  if (cfg.record_diagnostics) traj.diagnostics.push_back(diagnostic_row(u0, 0.0, cfg.grid_factor));

  for (int s = 0; s < forcing.steps(); ++s) {
    const SpectralField& u = traj.states.back();
    const SpectralField& f0 = forcing.values[s];
    const SpectralField& f1 = forcing.values[s + 1];
    SpectralField next = exp_step(prop, cfg.scheme, u, [&](const SpectralField& w, bool end) {
      return drift(w, end ? f1 : f0, cfg);
    });
    if (noisy) next += detail::ou_innovation(n, *spec, 0.0, h, stream);
    const double t = (s + 1) * h;
    check_state(next, t, cfg.blowup);
    if (cfg.record_diagnostics) {
      DiagnosticRow row = diagnostic_row(next, t, cfg.grid_factor);
      row.energy_residual = energy_budget(u, next, f0, h);
      traj.diagnostics.push_back(row);
    }
    traj.states.push_back(std::move(next));
  }
  return traj;
}

}  // namespace

int step_count(double horizon, double dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  const double r = horizon / dt;
  const double n = std::round(r);
  if (std::abs(r - n) > 1e-9 * std::max(1.0, r)) throw DomainError("horizon is not a multiple of dt");
  return int(n);
}

ControlPath ControlPath::zero(int cutoff, double dt, int steps) {
  ControlPath p;
  p.dt = dt;
  p.values.assign(std::size_t(steps) + 1, SpectralField(cutoff));
  return p;
}

ControlPath ControlPath::constant(const SpectralField& phi, double dt, int steps) {
  ControlPath p;
  p.dt = dt;
  p.values.assign(std::size_t(steps) + 1, phi);
  return p;
}

ControlPath ControlPath::sampled(const std::function<SpectralField(double)>& phi, double dt, int steps) {
  ControlPath p;
  p.dt = dt;
  p.values.reserve(std::size_t(steps) + 1);
  for (int n = 0; n <= steps; ++n) p.values.push_back(phi(n * dt));
  return p;
}

double ControlPath::l2_norm_squared() const {
  double s = 0.0;
  for (int n = 0; n < steps(); ++n) s += real_inner(values[n], values[n]);
  return s * dt;
}

ControlPath ControlPath::reweighted(const NoiseSpec& spec) const {
  ControlPath p;
  p.dt = dt;
  p.values.reserve(values.size());
  for (const auto& v : values) p.values.push_back(v.scaled([&](Wavenumber k) { return spec.lambda(k); }));
  return p;
}

std::string to_string(Scheme s) { return s == Scheme::etd2 ? "etd2" : "exponential_euler"; }

Scheme scheme_from_string(const std::string& name) {
  if (name == "exponential_euler") return Scheme::exponential_euler;
  if (name == "etd2") return Scheme::etd2;
  throw DomainError("unknown scheme '" + name + "'");
}

double courant_number(const SpectralField& u, double dt, DealiasRule rule) {
  const int n = u.cutoff();
  const VectorSpectrum vel = velocity(u);
  auto& tr = GridTransform::cached(quadrature_grid_size(n, 2));
  const auto g1 = tr.synthesize(vel.c1, n);
  const auto g2 = tr.synthesize(vel.c2, n);
  double m = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i) m = std::max(m, std::hypot(g1[i].real(), g2[i].real()));
  return dt * rule.effective_cutoff(n) * m;
}

Trajectory duhamel_gamma(const ControlPath& phi) {
  if (phi.values.empty()) throw DomainError("empty control path");
  const int n = phi.cutoff();
  const Propagator prop(n, phi.dt);
  Trajectory traj;
  traj.dt = phi.dt;
  traj.states.reserve(phi.values.size());
  traj.states.emplace_back(n);
  for (int s = 0; s < phi.steps(); ++s) traj.states.push_back(prop.euler(traj.states.back(), phi.values[s]));
  return traj;
}

Trajectory phi_eps(const ControlPath& phi, const NoiseSpec& spec) {
  Trajectory t = duhamel_gamma(phi.reweighted(spec));
  t.metadata.epsilon = spec.epsilon;
  t.metadata.delta = spec.delta;
  return t;
}

SpectralField step_skeleton(const SpectralField& u, const SpectralField& phi_now, const IntegratorConfig& cfg,
                            double dt) {
  return step_skeleton(u, phi_now, phi_now, cfg, dt);
}

SpectralField step_skeleton(const SpectralField& u, const SpectralField& phi_now, const SpectralField& phi_next,
                            const IntegratorConfig& cfg, double dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  if (dt > cfg.dt * (1.0 + 1e-12)) throw DomainError("step exceeds configured dt");
  if (phi_now.cutoff() != u.cutoff() || phi_next.cutoff() != u.cutoff())
    throw DimensionError("control and state cutoffs differ");
  const Propagator prop(u.cutoff(), dt);
  SpectralField next = exp_step(prop, cfg.scheme, u, [&](const SpectralField& w, bool end) {
    return drift(w, end ? phi_next : phi_now, cfg);
  });
  check_state(next, dt, cfg.blowup);
  return next;
}

Trajectory solve_skeleton(const SpectralField& u0, const ControlPath& phi, const IntegratorConfig& cfg) {
  return integrate(u0, phi, nullptr, cfg, nullptr);
}

Trajectory solve_stochastic(const SpectralField& u0, const NoiseSpec& spec, double horizon,
                            const IntegratorConfig& cfg, const RngStream& rng) {
  const ControlPath zero = ControlPath::zero(u0.cutoff(), cfg.dt, step_count(horizon, cfg.dt));
  return integrate(u0, zero, &spec, cfg, &rng);
}

Trajectory solve_controlled(const SpectralField& u0, const ControlPath& phi, const NoiseSpec& spec,
                            const IntegratorConfig& cfg, const RngStream& rng) {
  return integrate(u0, phi.reweighted(spec), &spec, cfg, &rng);
}

ShiftedSolution solve_shifted(const SpectralField& u0, const ControlPath& phi, const NoiseSpec& spec, double alpha,
                              const IntegratorConfig& cfg, const RngStream& rng, bool monitor,
                              AprioriConstants constants) {
  if (alpha < 0.0) throw DomainError("alpha must be nonnegative");
  check_grid(phi.dt, cfg);
  if (phi.cutoff() != u0.cutoff()) throw DimensionError("control and initial state cutoffs differ");
  const int n = u0.cutoff();
  const double h = phi.dt;
  const int steps = phi.steps();
  const Propagator prop(n, h);
  const Propagator prop_alpha(n, h, alpha);
  const bool noisy = spec.epsilon != 0.0 && cfg.noise;

  ShiftedSolution out;
  out.phi = phi_eps(phi, spec);

  RngStream init = rng.substream(kInitialOuStream);
  RngStream stream = rng;
  out.z.dt = h;
  out.z.metadata = make_metadata(&spec, rng.seed(), cfg.scheme);
  out.z.states.reserve(steps + 1);
  out.z.states.push_back(noisy ? ou_stationary_sample(n, spec, alpha, init) : SpectralField(n));
  for (int s = 0; s < steps; ++s) {
    SpectralField next = heat_semigroup(out.z.states.back(), h, alpha);
    if (noisy) next += detail::ou_innovation(n, spec, alpha, h, stream);
    out.z.states.push_back(std::move(next));
  }

  out.v.dt = h;
  out.v.metadata = out.z.metadata;
  out.v.states.reserve(steps + 1);
  out.v.states.push_back(u0 - out.z.states.front());
  for (int s = 0; s < steps; ++s) {
    SpectralField next = exp_step(prop, cfg.scheme, out.v.states.back(), [&](const SpectralField& w, bool end) {
      const int j = end ? s + 1 : s;
      SpectralField shifted = w + out.z.states[j] + out.phi.states[j];
      SpectralField r = cfg.nonlinear ? b_self(shifted, cfg.dealias) : SpectralField(n);
      if (alpha != 0.0) r.axpy(alpha, out.z.states[j]);
      return r;
    });
    check_state(next, (s + 1) * h, cfg.blowup);
    out.v.states.push_back(std::move(next));
  }

  out.sum.dt = h;
  out.sum.metadata = out.v.metadata;
  out.sum.states.reserve(steps + 1);
  for (int s = 0; s <= steps; ++s) out.sum.states.push_back(out.v.states[s] + out.z.states[s] + out.phi.states[s]);

  if (monitor) {
    AprioriMonitor m;
    m.constants = constants;
    const double base = real_inner(u0, u0) + real_inner(out.z.states[0], out.z.states[0]) + 1.0;
    double dissipated = 0.0, z4 = 0.0;
    for (int s = 0; s <= steps; ++s) {
      const auto& v = out.v.states[s];
      const double lhs = real_inner(v, v) + dissipated;
      const double rhs =
          constants.prefactor * std::exp(constants.rate * z4) * (base + (alpha * alpha + 1.0) * z4);
      m.lhs.push_back(lhs);
      m.rhs.push_back(rhs);
      m.max_ratio = std::max(m.max_ratio, lhs / rhs);
      dissipated += h * std::pow(v_norm(v), 2);
      z4 += h * std::pow(lp_norm(out.z.states[s], 4.0, cfg.grid_factor), 4);
    }
    m.holds = m.max_ratio <= 1.0;
    out.monitor = std::move(m);
  }
  return out;
}

double l4_spacetime_norm4(const Trajectory& traj, int grid_factor) {
  double s = 0.0;
  for (int n = 0; n < traj.steps(); ++n) s += std::pow(lp_norm(traj.states[n], 4.0, grid_factor), 4);
  return s * traj.dt;
}

double field_distance(const SpectralField& a, const SpectralField& b, const MetricSpec& metric) {
  const SpectralField d = a - b;
  return metric.kind == PathMetric::h ? h_norm(d) : besov_norm(d, metric.sigma, metric.p, metric.grid_factor);
}

double sup_distance(const Trajectory& a, const Trajectory& b, const MetricSpec& metric) {
  if (a.states.size() != b.states.size()) throw DimensionError("trajectories have different lengths");
  double m = 0.0;
  for (std::size_t i = 0; i < a.states.size(); ++i) m = std::max(m, field_distance(a.states[i], b.states[i], metric));
  return m;
}

}  // namespace nsldp
