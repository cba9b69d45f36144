#include "nsldp/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nsldp/errors.hpp"
#include "nsldp/parallel.hpp"
#include "nsldp/presets.hpp"

namespace nsldp {

namespace {

/// <a, b> in L^2(0,T;H) for grid controls: dt * sum_{n<S} Re<a_n, b_n>.
double l2_pairing(const ControlPath& a, const ControlPath& b) {
  double s = 0.0;
  for (int n = 0; n < a.steps(); ++n) s += real_inner(a.values[n], b.values[n]);
  return s * a.dt;
}

void axpy(ControlPath& y, double a, const ControlPath& x) {
  for (std::size_t n = 0; n < y.values.size(); ++n) y.values[n].axpy(a, x.values[n]);
}

struct Multipliers {
  std::vector<double> decay;
  std::vector<double> psi1;

  Multipliers(int cutoff, double h) : decay(lattice_size(cutoff), 0.0), psi1(lattice_size(cutoff), 0.0) {
    for_each_wavenumber(cutoff, [&](Wavenumber k) {
      const std::size_t i = lattice_index(cutoff, k.k1, k.k2);
      decay[i] = std::exp(-k.norm2() * h);
      psi1[i] = -std::expm1(-k.norm2() * h) / k.norm2();
    });
  }

  SpectralField apply(const std::vector<double>& m, const SpectralField& u) const {
    SpectralField out(u);
    auto c = out.mutable_coefficients();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= m[i];
    return out;
  }
};

/// Forward exponential Euler with stored states (the model differentiated by the adjoint).
std::vector<SpectralField> forward_states(const ControlObjective& obj, const ControlPath& phi,
                                          const Multipliers& mult) {
  std::vector<SpectralField> states;
  states.reserve(phi.values.size());
  states.push_back(obj.u0);
  for (int n = 0; n < phi.steps(); ++n) {
    const SpectralField& u = states.back();
    SpectralField drive = obj.cfg.nonlinear ? b_self(u, obj.cfg.dealias) : SpectralField(u.cutoff());
    drive += phi.values[n];
    SpectralField next = mult.apply(mult.decay, u);
    next += mult.apply(mult.psi1, drive);
    if (!std::isfinite(h_norm(next))) throw IntegrationError("non-finite state in control forward model", (n + 1) * phi.dt);
    states.push_back(std::move(next));
  }
  return states;
}

double objective_from_states(const ControlObjective& obj, const ControlPath& phi,
                             const std::vector<SpectralField>& states) {
  const SpectralField miss = states.back() - obj.target;
  return 0.5 * phi.l2_norm_squared() + obj.penalty * real_inner(miss, miss);
}

stats::SlopeFit fit_family(const ConvergenceReport& r) {
  return stats::loglog_slope(r.epsilons, r.distances, r.stderrs);
}

/// Runs one replica per (member, replica) pair and fills means and stderrs.
template <class Sample>
ConvergenceReport run_family(const FamilySpec& family, const std::string& metric, Sample&& sample) {
  if (family.epsilons.empty()) throw DomainError("empty epsilon family");
  if (family.replicas < 2) throw DomainError("need at least 2 replicas");
  ConvergenceReport rep;
  rep.metric = metric;
  rep.replicas = family.replicas;
  rep.epsilons = family.epsilons;
  const int members = int(family.epsilons.size());
  rep.samples.assign(members, std::vector<double>(family.replicas));
  parallel_for(members * family.replicas, [&](int idx) {
    const int e = idx / family.replicas;
    const int r = idx % family.replicas;
    const NoiseSpec spec = NoiseSpec::scheduled(family.epsilons[e], family.gamma, family.schedule, family.eta);
    rep.samples[e][r] = sample(spec, r);
  });
  for (int e = 0; e < members; ++e) {
    rep.deltas.push_back(family.schedule(family.epsilons[e]));
    const auto ms = stats::mean_stderr(rep.samples[e]);
    rep.distances.push_back(ms.mean);
    rep.stderrs.push_back(ms.stderr_);
  }
  rep.fit = fit_family(rep);
  return rep;
}

}  // namespace

ControlPath residual(const Trajectory& f, DealiasRule rule) {
  if (f.states.size() < 3) throw DomainError("residual needs a trajectory with at least 2 steps");
  if (!(f.dt > 0.0)) throw DomainError("trajectory dt must be positive");
  const int last = f.steps();
  const double h = f.dt;
  ControlPath r;
  r.dt = h;
  r.values.reserve(f.states.size());
  for (int n = 0; n <= last; ++n) {
    SpectralField d(f.cutoff());
    if (n == 0) {
      d.axpy(-1.5 / h, f.states[0]).axpy(2.0 / h, f.states[1]).axpy(-0.5 / h, f.states[2]);
    } else if (n == last) {
      d.axpy(1.5 / h, f.states[n]).axpy(-2.0 / h, f.states[n - 1]).axpy(0.5 / h, f.states[n - 2]);
    } else {
      d.axpy(0.5 / h, f.states[n + 1]).axpy(-0.5 / h, f.states[n - 1]);
    }
    d -= stokes_apply(f.states[n]);
    d -= b_self(f.states[n], rule);
    r.values.push_back(std::move(d));
  }
  return r;
}

ActionReport action(const Trajectory& f, DealiasRule rule) {
  ActionReport rep;
  rep.residual_path = residual(f, rule);
  rep.dt = f.dt;
  const auto& v = rep.residual_path.values;
  double s = 0.0;
  for (std::size_t n = 0; n < v.size(); ++n) {
    const double w = (n == 0 || n + 1 == v.size()) ? 0.5 : 1.0;
    s += w * real_inner(v[n], v[n]);
  }
  rep.value = 0.5 * f.dt * s;
  return rep;
}

ActionSequence action_sequence(const std::vector<double>& dts, const std::vector<double>& values) {
  if (dts.size() != values.size() || dts.size() < 2) throw DomainError("need at least two (dt, action) pairs");
  ActionSequence seq;
  seq.dts = dts;
  seq.values = values;
  seq.exponent = stats::loglog_slope(dts, values, {}).slope;
  seq.diverging = seq.exponent < -0.5;
  return seq;
}

double ControlObjective::value(const ControlPath& phi) const {
  const Multipliers mult(u0.cutoff(), phi.dt);
  return objective_from_states(*this, phi, forward_states(*this, phi, mult));
}

double ControlObjective::gradient(const ControlPath& phi, ControlPath& grad) const {
  const Multipliers mult(u0.cutoff(), phi.dt);
  const auto states = forward_states(*this, phi, mult);
  const double j = objective_from_states(*this, phi, states);
  const int steps = phi.steps();
  grad.dt = phi.dt;
  grad.values.assign(phi.values.size(), SpectralField(u0.cutoff()));
  SpectralField lambda = states.back() - target;
  lambda *= 2.0 * penalty;
  for (int n = steps - 1; n >= 0; --n) {
    const SpectralField dl = mult.apply(mult.psi1, lambda);
    grad.values[n] = phi.values[n];
    grad.values[n] *= phi.dt;
    grad.values[n] += dl;
    SpectralField next = mult.apply(mult.decay, lambda);
    if (cfg.nonlinear) next += b_linearized_adjoint(states[n], dl, cfg.dealias);
    lambda = std::move(next);
  }
  return j;
}

InstantonResult minimize_action(const SpectralField& u0, const SpectralField& target, double horizon,
                                const IntegratorConfig& cfg, const OptimizerSettings& opt,
                                const std::optional<ControlPath>& initial) {
  if (u0.cutoff() != target.cutoff()) throw DimensionError("initial state and target cutoffs differ");
  const int steps = step_count(horizon, cfg.dt);
  ControlObjective obj{u0, target, cfg, opt.penalty};
  obj.cfg.scheme = Scheme::exponential_euler;
  ControlPath phi = initial ? *initial : ControlPath::zero(u0.cutoff(), cfg.dt, steps);
  if (phi.steps() != steps || std::abs(phi.dt - cfg.dt) > 1e-12 * cfg.dt)
    throw DimensionError("initial control does not match the time grid");

  InstantonResult res;
  res.converged = true;
  for (int stage = 0; stage <= opt.max_penalty_doublings; ++stage) {
    ControlPath g;
    double j = obj.gradient(phi, g);
    for (auto& v : g.values) v *= 1.0 / phi.dt;  // L^2(0,T;H) Riesz representative
    double step = 1.0;
    bool stage_done = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
      ++res.iterations;
      const double gg = l2_pairing(g, g);
      if (gg <= 1e-30 * std::max(1.0, j * j)) {
        stage_done = true;
        break;
      }
      ControlPath trial;
      double jt = j;
      double a = step;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        trial = phi;
        axpy(trial, -a, g);
        jt = obj.value(trial);
        if (jt <= j - opt.armijo * a * gg) {
          accepted = true;
          break;
        }
        a *= 0.5;
      }
      if (!accepted) {
        stage_done = true;
        break;
      }
      ControlPath gn;
      jt = obj.gradient(trial, gn);
      for (auto& v : gn.values) v *= 1.0 / trial.dt;
      ControlPath s = trial;
      axpy(s, -1.0, phi);
      ControlPath y = gn;
      axpy(y, -1.0, g);
      const double sy = l2_pairing(s, y);
      step = sy > 0.0 ? l2_pairing(s, s) / sy : 2.0 * a;
      const double rel = (j - jt) / std::max(std::abs(j), std::numeric_limits<double>::min());
      phi = std::move(trial);
      g = std::move(gn);
      j = jt;
      if (rel < opt.rel_tol) {
        stage_done = true;
        break;
      }
    }
    if (!stage_done) res.converged = false;
    res.objective = j;
    res.penalty = obj.penalty;
    IntegratorConfig fwd = obj.cfg;
    res.path = solve_skeleton(u0, phi, fwd);
    res.endpoint_error = h_norm(res.path.final_state() - target);
    if (res.endpoint_error < opt.endpoint_tol) break;
    if (stage == opt.max_penalty_doublings) res.converged = false;
    obj.penalty *= 2.0;
  }
  res.phi_star = phi;
  res.report.value = 0.5 * phi.l2_norm_squared();
  res.report.residual_path = phi;
  res.report.dt = phi.dt;
  return res;
}

GradientCheck gradient_check(const ControlObjective& objective, const ControlPath& phi, int directions,
                             const RngStream& rng, double step) {
  GradientCheck chk;
  ControlPath g;
  objective.gradient(phi, g);
  for (int d = 0; d < directions; ++d) {
    RngStream local = rng.substream(std::uint64_t(d));
    ControlPath dir = phi;
    for (auto& v : dir.values) v = random_field(phi.cutoff(), local, double(phi.cutoff()) * std::sqrt(2.0), 0.5);
    dir.values.back() = SpectralField(phi.cutoff());
    double adj = 0.0;
    for (std::size_t n = 0; n < g.values.size(); ++n) adj += real_inner(g.values[n], dir.values[n]);
    ControlPath plus = phi, minus = phi;
    axpy(plus, step, dir);
    axpy(minus, -step, dir);
    const double fd = (objective.value(plus) - objective.value(minus)) / (2.0 * step);
    chk.adjoint.push_back(adj);
    chk.finite_difference.push_back(fd);
    const double scale = std::max(std::abs(adj), std::abs(fd));
    chk.max_rel_error = std::max(chk.max_rel_error, scale > 0.0 ? std::abs(adj - fd) / scale : 0.0);
  }
  return chk;
}

double linear_minimum_action(const SpectralField& u0, const SpectralField& target, double horizon) {
  if (u0.cutoff() != target.cutoff()) throw DimensionError("cutoffs differ");
  double s = 0.0;
  for_each_wavenumber(u0.cutoff(), [&](Wavenumber k) {
    const double lam = k.norm2();
    const cplx delta = target[k] - std::exp(-lam * horizon) * u0[k];
    s += lam * std::norm(delta) / (-std::expm1(-2.0 * lam * horizon));
  });
  return s;
}

void validate_theorem1(const FamilySpec& family) {
  if (!family.schedule.vanishes())
    throw ValidationError("lim_{eps->0} delta(eps) = 0", "schedule coefficient and exponent must be positive");
  if (!(family.eta > 0.0)) throw ValidationError("eta > 0", "eta = " + std::to_string(family.eta));
  if (!family.schedule.satisfies_scaling(family.eta))
    throw ValidationError("lim_{eps->0} eps delta(eps)^{-eta} = 0",
                          "delta = c eps^a needs 1 - a eta > 0; a = " + std::to_string(family.schedule.exponent) +
                              ", eta = " + std::to_string(family.eta));
  if (!(family.gamma > 0.0)) throw ValidationError("gamma > 0", "gamma = " + std::to_string(family.gamma));
}

void validate_besov_params(const BesovParams& b) {
  const double s = b.sigma, p = b.p, a = b.alpha, be = b.beta;
  if (!(s < 0.0)) throw ValidationError("sigma < 0", "sigma = " + std::to_string(s));
  if (!(p >= 2.0)) throw ValidationError("p >= 2", "p = " + std::to_string(p));
  if (!(s > std::max(-2.0 / p, 2.0 / p - 1.0)))
    throw ValidationError("sigma > -2/p v (2/p - 1)",
                          "sigma = " + std::to_string(s) + ", bound = " + std::to_string(std::max(-2.0 / p, 2.0 / p - 1.0)));
  if (!(2.0 / p > a && a > -s && -s > 0.0))
    throw ValidationError("2/p > alpha > -sigma > 0", "alpha = " + std::to_string(a) + ", sigma = " + std::to_string(s));
  if (!(be >= 2.0)) throw ValidationError("beta >= 2", "beta = " + std::to_string(be));
  const double mid = a / 2.0 - 1.0 / be;
  if (!(-0.5 + 1.0 / p < mid && mid < s / 2.0))
    throw ValidationError("-1/2 + 1/p < alpha/2 - 1/beta < sigma/2", "alpha/2 - 1/beta = " + std::to_string(mid));
}

void validate_theorem2(const FamilySpec& family, const BesovParams& b, double theta) {
  validate_besov_params(b);
  if (!family.schedule.vanishes())
    throw ValidationError("lim_{eps->0} delta(eps) = 0", "schedule coefficient and exponent must be positive");
  const double need = b.sigma + 1.0 - 2.0 / b.p;
  if (!(theta >= need))
    throw ValidationError("theta >= sigma + 1 - 2/p", "theta = " + std::to_string(theta) + " < " + std::to_string(need));
}

ConvergenceReport convergence_theorem1(const SpectralField& u0, const ControlPath& phi, const FamilySpec& family,
                                       const IntegratorConfig& cfg, const RngStream& rng,
                                       bool allow_scaling_violation) {
  if (!allow_scaling_violation) validate_theorem1(family);
  const Trajectory reference = solve_skeleton(u0, phi, cfg);
  return run_family(family, "sup_t |.|_H", [&](const NoiseSpec& spec, int r) {
    const Trajectory u = solve_controlled(u0, phi, spec, cfg, rng.substream(std::uint64_t(r)));
    return sup_distance(u, reference);
  });
}

ConvergenceReport convergence_theorem2(const SpectralField& u0, const ControlPath& phi, const BesovParams& besov,
                                       double theta, const FamilySpec& family, const IntegratorConfig& cfg,
                                       const RngStream& rng, int grid_factor) {
  validate_theorem2(family, besov, theta);
  if (!std::isfinite(sobolev_norm(u0, theta))) throw ValidationError("u0 in H^theta", "norm is not finite");
  const Trajectory reference = solve_skeleton(u0, phi, cfg);
  const MetricSpec metric{PathMetric::besov, besov.sigma, besov.p, grid_factor};
  return run_family(family, "sup_t |.|_B^sigma_p", [&](const NoiseSpec& spec, int r) {
    const Trajectory u = solve_controlled(u0, phi, spec, cfg, rng.substream(std::uint64_t(r)));
    return sup_distance(u, reference, metric);
  });
}

ConvergenceReport renormalized_square_convergence(int cutoff, const FamilySpec& family, double sigma,
                                                  DealiasRule rule, const RngStream& rng) {
  return run_family(family, "|z(x)z - eps theta I|_H^sigma", [&](const NoiseSpec& spec, int r) {
    RngStream local = rng.substream(std::uint64_t(r));
    const SpectralField z = ou_stationary_sample(cutoff, spec, 0.0, local);
    return wick_square(z, spec, rule).sobolev_norm(sigma);
  });
}

std::vector<TubeRow> tube_probability(const SpectralField& u0, const Trajectory& center,
                                      const std::vector<double>& radii, const NoiseSpec& spec, int replicas,
                                      const IntegratorConfig& cfg, const RngStream& rng) {
  if (replicas < 1000) throw DomainError("tube_probability needs at least 1000 replicas");
  for (double r : radii)
    if (!(r > 0.0)) throw DomainError("tube radius must be positive");
  if (std::abs(center.dt - cfg.dt) > 1e-12 * cfg.dt) throw DimensionError("center grid does not match dt");
  std::vector<double> dist(replicas);
  parallel_for(replicas, [&](int r) {
    const Trajectory u = solve_stochastic(u0, spec, center.horizon(), cfg, rng.substream(std::uint64_t(r)));
    dist[r] = sup_distance(u, center);
  });
  std::vector<TubeRow> rows;
  for (double radius : radii) {
    TubeRow row;
    row.radius = radius;
    row.trials = std::size_t(replicas);
    row.hits = std::size_t(std::count_if(dist.begin(), dist.end(), [&](double d) { return d <= radius; }));
    row.p_hat = double(row.hits) / double(row.trials);
    const auto ci = stats::wilson_interval(row.hits, row.trials);
    if (row.hits > 0) row.ci_low = ci.low;
    row.ci_high = ci.high;
    rows.push_back(row);
  }
  return rows;
}

double LaplaceFunctional::operator()(const SpectralField& endpoint) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::constant:
      return constant;
    case Kind::clipped_endpoint: {
      const SpectralField d = endpoint - target;
      return std::min(clip, real_inner(d, d));
    }
  }
  return 0.0;
}

LaplaceReport laplace_check(const SpectralField& u0, const LaplaceFunctional& functional, double horizon,
                            const FamilySpec& family, const IntegratorConfig& cfg, const RngStream& rng,
                            const OptimizerSettings& opt, int family_points) {
  if (family_points < 2) throw DomainError("need at least 2 family points");
  LaplaceReport rep;
  const int steps = step_count(horizon, cfg.dt);
  const Trajectory free = solve_skeleton(u0, ControlPath::zero(u0.cutoff(), cfg.dt, steps), cfg);
  const SpectralField& y_free = free.final_state();
  if (functional.kind == LaplaceFunctional::Kind::clipped_endpoint) {
    rep.rhs = std::numeric_limits<double>::infinity();
    for (int i = 0; i < family_points; ++i) {
      const double s = double(i) / (family_points - 1);
      SpectralField y = y_free;
      y *= 1.0 - s;
      y.axpy(s, functional.target);
      const double cost = i == 0 ? 0.0 : minimize_action(u0, y, horizon, cfg, opt).report.value;
      const double total = functional(y) + cost;
      rep.family_s.push_back(s);
      rep.family_values.push_back(total);
      rep.rhs = std::min(rep.rhs, total);
    }
  } else {
    rep.rhs = functional(y_free);
  }

  for (double eps : family.epsilons) {
    if (!(eps > 0.0)) throw DomainError("laplace_check needs epsilon > 0");
    const NoiseSpec spec = NoiseSpec::scheduled(eps, family.gamma, family.schedule, family.eta);
    std::vector<double> a(family.replicas);
    parallel_for(family.replicas, [&](int r) {
      const Trajectory u = solve_stochastic(u0, spec, horizon, cfg, rng.substream(std::uint64_t(r)));
      a[r] = -functional(u.final_state()) / eps;
    });
    LaplaceRow row;
    row.epsilon = eps;
    row.delta = spec.delta;
    row.lhs = -eps * stats::log_mean_exp(a);
    const double m = *std::max_element(a.begin(), a.end());
    std::vector<double> w(a.size());
    double sw = 0.0, sw2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      w[i] = std::exp(a[i] - m);
      sw += w[i];
      sw2 += w[i] * w[i];
    }
    const auto ms = stats::mean_stderr(w);
    row.lhs_stderr = ms.mean > 0.0 ? eps * ms.stderr_ / ms.mean : std::numeric_limits<double>::infinity();
    row.ess = sw * sw / sw2;
    row.flagged = row.ess < std::max(10.0, 0.01 * family.replicas);
    row.rhs = rep.rhs;
    row.gap = std::abs(row.lhs - row.rhs);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace nsldp
