#pragma once

// Colored noise with covariance Q_delta = (I + delta (-A)^gamma)^{-1}, exact
// Ornstein-Uhlenbeck sampling per Fourier mode, the renormalization constant
// theta_delta and the lattice sums that drive the moment estimates for z.

#include <cstdint>
#include <limits>
#include <vector>

#include "nsldp/nonlinearity.hpp"
#include "nsldp/rng.hpp"
#include "nsldp/spectral.hpp"
#include "nsldp/stats.hpp"

namespace nsldp {

/// delta(eps) = coefficient * eps^exponent.
struct DeltaSchedule {
  double coefficient = 1.0;
  double exponent = 1.0;

  double operator()(double epsilon) const;
  /// delta(eps) -> 0 as eps -> 0.
  bool vanishes() const { return coefficient > 0.0 && exponent > 0.0; }
  /// eps * delta(eps)^{-eta} -> 0 as eps -> 0.
  bool satisfies_scaling(double eta) const { return 1.0 - exponent * eta > 0.0; }
};

struct NoiseSpec {
  double epsilon = 0.0;
  double delta = 0.0;
  double gamma = 1.0;
  DeltaSchedule schedule{};
  double eta = 1.0;

  /// Family member at `epsilon` with delta taken from the schedule.
  static NoiseSpec scheduled(double epsilon, double gamma, DeltaSchedule schedule, double eta = 1.0);
  NoiseSpec at_epsilon(double epsilon) const;
  /// lambda_k(delta) = (1 + delta |k|^{2 gamma})^{-1/2}.
  double lambda(Wavenumber k) const;
};

double covariance_weight(Wavenumber k, const NoiseSpec& spec);

/// Increment of w^delta over dt: <w, e_k> ~ complex normal with E|.|^2 = lambda_k^2 dt.
/// The epsilon factor is applied by callers.
SpectralField wiener_increment(int cutoff, const NoiseSpec& spec, double dt, RngStream& rng);

/// eps lambda_k^2 / (2 (|k|^2 + alpha)): stationary E|<z, e_k>|^2 of dz = (A - alpha) z dt + sqrt(eps) dw.
double ou_stationary_variance(Wavenumber k, const NoiseSpec& spec, double alpha);
SpectralField ou_stationary_sample(int cutoff, const NoiseSpec& spec, double alpha, RngStream& rng);
/// Exact OU transition over dt for every mode.
SpectralField ou_step(const SpectralField& z, const NoiseSpec& spec, double alpha, double dt,
                      RngStream& rng);

namespace detail {
/// Gaussian innovation of one exact OU step (decay not applied). Solvers share it with
/// ou_step so that equal streams give equal draws.
SpectralField ou_innovation(int cutoff, const NoiseSpec& spec, double alpha, double dt, RngStream& rng);
}  // namespace detail

/// Prefactored lattice sums 1/(2(2pi)^2) sum_{0<max|k_i|<=cutoff} k_i^2/|k|^4 lambda_k^2.
struct RenormSums {
  double k1_weighted = 0.0;
  double k2_weighted = 0.0;
};
RenormSums renorm_lattice_sum(double delta, double gamma, int cutoff);

struct RenormEstimate {
  double value = 0.0;           ///< lattice sum + tail: estimate of theta_delta on all of Z^2_0
  double lattice_sum = 0.0;     ///< truncated sum
  double tail = 0.0;            ///< estimated contribution of modes outside the square
  double error_estimate = 0.0;  ///< magnitude of the leading correction inside `tail`
  int cutoff = 0;
};
/// theta_delta with the lattice tail estimated by an integral comparison. Throws
/// TailToleranceError naming the required cutoff if error_estimate > tail_tol.
RenormEstimate renorm_constant(double delta, double gamma, int cutoff, double tail_tol = 1e-8);

/// eps * theta on the lattice that actually feeds the products under `rule`.
double wick_constant(int cutoff, const NoiseSpec& spec, DealiasRule rule);
/// z (x) z - eps theta I; the identity lives on the k = 0 diagonal entries.
TensorField wick_square(const SpectralField& z, const NoiseSpec& spec, DealiasRule rule);

struct LatticeSumEstimate {
  double value = 0.0;
  double lattice_sum = 0.0;
  double tail = 0.0;
  int cutoff = 0;
};
/// Lambda_beta(eps) = eps sum_k |k|^{-2(1-2 beta)} (1 + delta |k|^{2 gamma})^{-1}, 0 < beta < 1/4.
LatticeSumEstimate lambda_beta_bound(const NoiseSpec& spec, double beta, int cutoff = 256);
/// beta_eta = eta gamma / 2.
inline double beta_for_eta(double eta, double gamma) { return 0.5 * eta * gamma; }

/// sum_{k != 0} |k|^{2(sigma' - 1)} over all of Z^2_0 (lattice part + tail).
LatticeSumEstimate besov_rhs_sum(double sigma_prime, int cutoff = 256);

/// Closed form E|z|_{L^2}^2 = sum_k ou_stationary_variance on the cutoff lattice.
double ou_mean_energy(int cutoff, const NoiseSpec& spec, double alpha);

struct MomentReport {
  double estimate = 0.0;
  double stderr_ = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  double closed_form = std::numeric_limits<double>::quiet_NaN();
  int replicas = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo E|z(t)|_{L^p}^p against (eps log((1+delta)/delta))^{p/2}. The path starts
/// from the stationary law and is advanced to t by one exact OU step. For p = 2 the
/// closed form is attached.
MomentReport lp_log_moment_check(int cutoff, const NoiseSpec& spec, double p, double t, int replicas,
                                 const RngStream& rng, double alpha = 0.0, int grid_factor = 2);

/// Monte Carlo E sup_{t<=T} |z(t)|^kappa_{B^sigma_p} on a grid of `steps` intervals
/// against (eps sum |k|^{2(sigma'-1)})^{kappa/2}.
MomentReport besov_moment_check(int cutoff, const NoiseSpec& spec, double sigma, double sigma_prime,
                                double p, double kappa, double horizon, int steps, int replicas,
                                const RngStream& rng, double alpha = 0.0, int grid_factor = 2);

struct OuLawReport {
  double max_rel_error = 0.0;  ///< max_k |mean |c_k|^2 / v_k - 1|
  Wavenumber worst{};
  double ks_pvalue = 0.0;      ///< fresh vs one-step-advanced stationary samples
  int replicas = 0;
  std::vector<Wavenumber> modes;
  std::vector<double> empirical;
  std::vector<double> expected;
};
/// Per-mode stationary variances against the formula, plus a two-sample KS test of
/// sum_k |c_k|^2 / v_k between fresh samples and samples advanced by ou_step(dt).
OuLawReport ou_law_check(int cutoff, const NoiseSpec& spec, double alpha, double dt, int replicas,
                         const RngStream& rng);

struct WickZeroModeReport {
  stats::MeanStderr d11;
  stats::MeanStderr d22;
  stats::MeanStderr off12;
  double theta = 0.0;
};
/// Monte Carlo mean of the k = 0 entries of the Wick square over stationary samples (alpha = 0).
WickZeroModeReport wick_zero_mode_check(int cutoff, const NoiseSpec& spec, DealiasRule rule, int replicas,
                                        const RngStream& rng);

}  // namespace nsldp
