#include "nsldp/noise.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "nsldp/errors.hpp"
#include "nsldp/parallel.hpp"
#include "nsldp/stats.hpp"

namespace nsldp {

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4.0;
const double kRenormPrefactor = 1.0 / (2.0 * kTwoPi * kTwoPi);

/// Integral over theta in [0, pi/4] of f(L / cos theta): one octant of the exterior
/// of the square [-L, L]^2 in polar coordinates.
template <class F>
double octant_integral(double half_side, F&& f) {
  auto integrand = [&](double theta) { return f(half_side / std::cos(theta)); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, kQuarterPi,
                                                                       10, 1e-13);
}

void require_positive_dt(double dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
}

}  // namespace

namespace detail {

SpectralField ou_innovation(int cutoff, const NoiseSpec& spec, double alpha, double dt,
                            RngStream& rng) {
  SpectralField g(cutoff);
  for_each_half_wavenumber(cutoff, [&](Wavenumber k) {
    const double rate = k.norm2() + alpha;
    const double lam = spec.lambda(k);
    const double var = spec.epsilon * lam * lam * (-std::expm1(-2.0 * rate * dt)) / (2.0 * rate);
    const double s = std::sqrt(0.5 * var);
    const double re = rng.normal();
    const double im = rng.normal();
    g.set_real(k, {s * re, s * im});
  });
  return g;
}

}  // namespace detail

double DeltaSchedule::operator()(double epsilon) const {
  if (epsilon <= 0.0) return 0.0;
  return coefficient * std::pow(epsilon, exponent);
}

NoiseSpec NoiseSpec::scheduled(double epsilon, double gamma, DeltaSchedule schedule, double eta) {
  NoiseSpec s;
  s.epsilon = epsilon;
  s.gamma = gamma;
  s.schedule = schedule;
  s.eta = eta;
  s.delta = schedule(epsilon);
  return s;
}

NoiseSpec NoiseSpec::at_epsilon(double eps) const {
  return scheduled(eps, gamma, schedule, eta);
}

double NoiseSpec::lambda(Wavenumber k) const {
  return 1.0 / std::sqrt(1.0 + delta * std::pow(k.norm2(), gamma));
}

double covariance_weight(Wavenumber k, const NoiseSpec& spec) { return spec.lambda(k); }

SpectralField wiener_increment(int cutoff, const NoiseSpec& spec, double dt, RngStream& rng) {
  require_positive_dt(dt);
  SpectralField w(cutoff);
  for_each_half_wavenumber(cutoff, [&](Wavenumber k) {
    const double lam = spec.lambda(k);
    const double s = lam * std::sqrt(0.5 * dt);
    const double re = rng.normal();
    const double im = rng.normal();
    w.set_real(k, {s * re, s * im});
  });
  return w;
}

double ou_stationary_variance(Wavenumber k, const NoiseSpec& spec, double alpha) {
  const double lam = spec.lambda(k);
  return spec.epsilon * lam * lam / (2.0 * (k.norm2() + alpha));
}

SpectralField ou_stationary_sample(int cutoff, const NoiseSpec& spec, double alpha, RngStream& rng) {
  if (alpha < 0.0) throw DomainError("alpha must be nonnegative");
  SpectralField z(cutoff);
  for_each_half_wavenumber(cutoff, [&](Wavenumber k) {
    const double s = std::sqrt(0.5 * ou_stationary_variance(k, spec, alpha));
    const double re = rng.normal();
    const double im = rng.normal();
    z.set_real(k, {s * re, s * im});
  });
  return z;
}

SpectralField ou_step(const SpectralField& z, const NoiseSpec& spec, double alpha, double dt,
                      RngStream& rng) {
  require_positive_dt(dt);
  SpectralField out = heat_semigroup(z, dt, alpha);
  if (spec.epsilon != 0.0) out += detail::ou_innovation(z.cutoff(), spec, alpha, dt, rng);
  return out;
}

RenormSums renorm_lattice_sum(double delta, double gamma, int cutoff) {
  if (cutoff < 1) throw DimensionError("cutoff must be at least 1");
  RenormSums s;
  auto weight = [&](int k1, int k2) {
    const double n2 = double(k1) * k1 + double(k2) * k2;
    return 1.0 / (n2 * n2 * (1.0 + delta * std::pow(n2, gamma)));
  };
  // The k2-weighted sum visits the transposed lattice, so both sums see their terms in
  // mirrored order and agree bit for bit.
  for (int a = -cutoff; a <= cutoff; ++a)
    for (int b = -cutoff; b <= cutoff; ++b) {
      if (a == 0 && b == 0) continue;
      s.k1_weighted += double(a) * a * weight(a, b);
      s.k2_weighted += double(a) * a * weight(b, a);
    }
  s.k1_weighted *= kRenormPrefactor;
  s.k2_weighted *= kRenormPrefactor;
  return s;
}

namespace {

// Exterior of the square [-L, L]^2, L = cutoff + 1/2, is exactly the union of unit cells
// centred on the dropped lattice points. By k1 <-> k2 symmetry the k1^2/|k|^4 weight
// averages to 1/(2|k|^2), leaving radial integrals.
double renorm_tail_integral(double delta, double gamma, double half_side) {
  return 4.0 * octant_integral(half_side, [&](double rho) {
           return std::log1p(1.0 / (delta * std::pow(rho, 2.0 * gamma))) / (2.0 * gamma);
         });
}

// Midpoint-rule correction (1/24) int_E Laplacian(f).
double renorm_tail_correction(double delta, double gamma, double half_side) {
  return 4.0 / 24.0 * octant_integral(half_side, [&](double rho) {
           const double s = delta * std::pow(rho, 2.0 * gamma);
           return (2.0 / (1.0 + s) + 2.0 * gamma * s / ((1.0 + s) * (1.0 + s))) / (rho * rho);
         });
}

}  // namespace

RenormEstimate renorm_constant(double delta, double gamma, int cutoff, double tail_tol) {
  if (!(delta > 0.0)) throw DomainError("theta_delta diverges for delta <= 0");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  const double error = kRenormPrefactor * renorm_tail_correction(delta, gamma, cutoff + 0.5);
  if (error > tail_tol) {
    int required = cutoff;
    while (kRenormPrefactor * renorm_tail_correction(delta, gamma, required + 0.5) > tail_tol) {
      required = required + std::max(1, required / 4);
      if (required > (1 << 24)) break;
    }
    throw TailToleranceError("theta_delta tail estimate " + std::to_string(error) +
                                 " exceeds tolerance " + std::to_string(tail_tol),
                             required);
  }
  RenormEstimate r;
  r.cutoff = cutoff;
  r.lattice_sum = renorm_lattice_sum(delta, gamma, cutoff).k1_weighted;
  r.tail = kRenormPrefactor * renorm_tail_integral(delta, gamma, cutoff + 0.5) - error;
  r.error_estimate = error;
  r.value = r.lattice_sum + r.tail;
  return r;
}

double wick_constant(int cutoff, const NoiseSpec& spec, DealiasRule rule) {
  return spec.epsilon * renorm_lattice_sum(spec.delta, spec.gamma, rule.effective_cutoff(cutoff)).k1_weighted;
}

TensorField wick_square(const SpectralField& z, const NoiseSpec& spec, DealiasRule rule) {
  TensorField t = tensor_product(z, z, rule);
  const int keep = rule.effective_cutoff(z.cutoff());
  const auto sums = renorm_lattice_sum(spec.delta, spec.gamma, keep);
  // z_1 carries k_2 in its polarization, z_2 carries k_1.
  t.at(0, 0, 0, 0) -= spec.epsilon * sums.k2_weighted;
  t.at(1, 1, 0, 0) -= spec.epsilon * sums.k1_weighted;
  return t;
}

LatticeSumEstimate lambda_beta_bound(const NoiseSpec& spec, double beta, int cutoff) {
  if (!(beta > 0.0 && beta < 0.25)) throw DomainError("beta must lie in (0, 1/4)");
  if (!(spec.delta > 0.0)) throw DomainError("Lambda_beta diverges for delta <= 0");
  const double a = 4.0 * beta;
  if (!(2.0 * spec.gamma > a)) throw DomainError("Lambda_beta diverges unless gamma > 2 beta");
  LatticeSumEstimate r;
  r.cutoff = cutoff;
  double sum = 0.0;
  for_each_wavenumber(cutoff, [&](Wavenumber k) {
    const double n2 = k.norm2();
    sum += std::pow(n2, -(1.0 - 2.0 * beta)) / (1.0 + spec.delta * std::pow(n2, spec.gamma));
  });
  boost::math::quadrature::exp_sinh<double> radial;
  const double tail = 8.0 * octant_integral(cutoff + 0.5, [&](double rho) {
    const double log_base = std::log(spec.delta) + 2.0 * spec.gamma * std::log(rho);
    auto f = [&](double u) {
      const double w = log_base + 2.0 * spec.gamma * u;
      const double softplus = w > 0.0 ? w + std::log1p(std::exp(-w)) : std::log1p(std::exp(w));
      return std::exp(a * u - softplus);
    };
    return std::pow(rho, a) * radial.integrate(f);
  });
  r.lattice_sum = spec.epsilon * sum;
  r.tail = spec.epsilon * tail;
  r.value = r.lattice_sum + r.tail;
  return r;
}

LatticeSumEstimate besov_rhs_sum(double sigma_prime, int cutoff) {
  if (!(sigma_prime < 0.0)) throw DomainError("sigma' must be negative");
  LatticeSumEstimate r;
  r.cutoff = cutoff;
  for_each_wavenumber(cutoff, [&](Wavenumber k) { r.lattice_sum += std::pow(k.norm2(), sigma_prime - 1.0); });
  r.tail = 8.0 * octant_integral(cutoff + 0.5, [&](double rho) {
    return std::pow(rho, 2.0 * sigma_prime) / (-2.0 * sigma_prime);
  });
  r.value = r.lattice_sum + r.tail;
  return r;
}

double ou_mean_energy(int cutoff, const NoiseSpec& spec, double alpha) {
  double sum = 0.0;
  for_each_wavenumber(cutoff, [&](Wavenumber k) { sum += ou_stationary_variance(k, spec, alpha); });
  return sum;
}

MomentReport lp_log_moment_check(int cutoff, const NoiseSpec& spec, double p, double t, int replicas,
                                 const RngStream& rng, double alpha, int grid_factor) {
  if (replicas < 100) throw DomainError("lp_log_moment_check needs at least 100 replicas");
  if (!(t >= 0.0)) throw DomainError("t must be nonnegative");
  if (!(spec.delta > 0.0)) throw DomainError("the bound requires delta > 0");
  std::vector<double> values(replicas);
  parallel_for(replicas, [&](int r) {
    RngStream local = rng.substream(std::uint64_t(r));
    SpectralField z = ou_stationary_sample(cutoff, spec, alpha, local);
    if (t > 0.0) z = ou_step(z, spec, alpha, t, local);
    values[r] = std::pow(lp_norm(z, p, grid_factor), p);
  });
  const auto ms = stats::mean_stderr(values);
  MomentReport rep;
  rep.estimate = ms.mean;
  rep.stderr_ = ms.stderr_;
  rep.bound = std::pow(spec.epsilon * std::log((1.0 + spec.delta) / spec.delta), 0.5 * p);
  rep.ratio = rep.estimate / rep.bound;
  if (p == 2.0) rep.closed_form = ou_mean_energy(cutoff, spec, alpha);
  rep.replicas = replicas;
  rep.seed = rng.seed();
  return rep;
}

MomentReport besov_moment_check(int cutoff, const NoiseSpec& spec, double sigma, double sigma_prime,
                                double p, double kappa, double horizon, int steps, int replicas,
                                const RngStream& rng, double alpha, int grid_factor) {
  if (!(sigma < sigma_prime && sigma_prime < 0.0))
    throw DomainError("requires sigma < sigma' < 0");
  if (!(p >= 1.0 && kappa >= 1.0)) throw DomainError("requires p, kappa >= 1");
  if (steps < 1 || !(horizon > 0.0)) throw DomainError("requires a positive horizon and steps");
  const double dt = horizon / steps;
  std::vector<double> values(replicas);
  parallel_for(replicas, [&](int r) {
    RngStream local = rng.substream(std::uint64_t(r));
    SpectralField z = ou_stationary_sample(cutoff, spec, alpha, local);
    double sup = besov_norm(z, sigma, p, grid_factor);
    for (int n = 0; n < steps; ++n) {
      z = ou_step(z, spec, alpha, dt, local);
      sup = std::max(sup, besov_norm(z, sigma, p, grid_factor));
    }
    values[r] = std::pow(sup, kappa);
  });
  const auto ms = stats::mean_stderr(values);
  MomentReport rep;
  rep.estimate = ms.mean;
  rep.stderr_ = ms.stderr_;
  rep.bound = std::pow(spec.epsilon * besov_rhs_sum(sigma_prime).value, 0.5 * kappa);
  rep.ratio = rep.estimate / rep.bound;
  rep.replicas = replicas;
  rep.seed = rng.seed();
  return rep;
}

}  // namespace nsldp

namespace nsldp {

OuLawReport ou_law_check(int cutoff, const NoiseSpec& spec, double alpha, double dt, int replicas,
                         const RngStream& rng) {
  if (replicas < 2) throw DomainError("ou_law_check needs at least 2 replicas");
  OuLawReport rep;
  rep.replicas = replicas;
  for_each_half_wavenumber(cutoff, [&](Wavenumber k) {
    rep.modes.push_back(k);
    rep.expected.push_back(ou_stationary_variance(k, spec, alpha));
  });
  const std::size_t m = rep.modes.size();
  std::vector<std::vector<double>> power(replicas, std::vector<double>(m));
  std::vector<double> fresh(replicas), stepped(replicas);
  auto normalized = [&](const SpectralField& z) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += std::norm(z[rep.modes[i]]) / rep.expected[i];
    return s;
  };
  const RngStream fresh_root = rng.substream(1);
  const RngStream stepped_root = rng.substream(2);
  parallel_for(replicas, [&](int r) {
    RngStream a = fresh_root.substream(std::uint64_t(r));
    const SpectralField z = ou_stationary_sample(cutoff, spec, alpha, a);
    for (std::size_t i = 0; i < m; ++i) power[r][i] = std::norm(z[rep.modes[i]]);
    fresh[r] = normalized(z);
    RngStream b = stepped_root.substream(std::uint64_t(r));
    SpectralField w = ou_stationary_sample(cutoff, spec, alpha, b);
    w = ou_step(w, spec, alpha, dt, b);
    stepped[r] = normalized(w);
  });
  rep.empirical.assign(m, 0.0);
  for (int r = 0; r < replicas; ++r)
    for (std::size_t i = 0; i < m; ++i) rep.empirical[i] += power[r][i];
  for (std::size_t i = 0; i < m; ++i) {
    rep.empirical[i] /= replicas;
    const double err = std::abs(rep.empirical[i] / rep.expected[i] - 1.0);
    if (err > rep.max_rel_error) {
      rep.max_rel_error = err;
      rep.worst = rep.modes[i];
    }
  }
  rep.ks_pvalue = stats::ks_two_sample_pvalue(fresh, stepped);
  return rep;
}

WickZeroModeReport wick_zero_mode_check(int cutoff, const NoiseSpec& spec, DealiasRule rule, int replicas,
                                        const RngStream& rng) {
  std::vector<double> d11(replicas), d22(replicas), off(replicas);
  parallel_for(replicas, [&](int r) {
    RngStream local = rng.substream(std::uint64_t(r));
    const SpectralField z = ou_stationary_sample(cutoff, spec, 0.0, local);
    const TensorField w = wick_square(z, spec, rule);
    d11[r] = w(0, 0, 0, 0).real();
    d22[r] = w(1, 1, 0, 0).real();
    off[r] = w(0, 1, 0, 0).real();
  });
  WickZeroModeReport rep;
  rep.d11 = stats::mean_stderr(d11);
  rep.d22 = stats::mean_stderr(d22);
  rep.off12 = stats::mean_stderr(off);
  rep.theta = renorm_lattice_sum(spec.delta, spec.gamma, rule.effective_cutoff(cutoff)).k1_weighted;
  return rep;
}

}  // namespace nsldp
