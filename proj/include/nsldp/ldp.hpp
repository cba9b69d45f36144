#pragma once

// Action functional, minimum-action controls and the Monte Carlo experiments
// probing the large-deviation statements at desk scale.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nsldp/dynamics.hpp"
#include "nsldp/noise.hpp"
#include "nsldp/stats.hpp"

namespace nsldp {

struct ActionReport {
  double value = 0.0;  ///< I_T(f)
  ControlPath residual_path;
  double dt = 0.0;
};

/// f' - Af - b(f) at every grid time; f' by centered differences, second-order one-sided
/// stencils at the ends.
ControlPath residual(const Trajectory& f, DealiasRule rule = {});
/// Trapezoid quadrature of |residual|_H^2 / 2.
ActionReport action(const Trajectory& f, DealiasRule rule = {});

/// Action of the same path family at decreasing dt. Off the finite-action class the
/// values grow like dt^{-1}; `diverging` is set when the fitted exponent is below -1/2.
struct ActionSequence {
  std::vector<double> dts;
  std::vector<double> values;
  double exponent = 0.0;  ///< slope of log(action) against log(dt)
  bool diverging = false;
};
ActionSequence action_sequence(const std::vector<double>& dts, const std::vector<double>& values);

struct OptimizerSettings {
  int max_iterations = 500;        ///< per penalty stage
  double rel_tol = 1e-8;           ///< relative decrease of the objective
  double penalty = 10.0;           ///< initial endpoint weight
  double endpoint_tol = 1e-3;      ///< |u(T) - target|_H accepted
  int max_penalty_doublings = 16;
  double armijo = 1e-4;
};

struct InstantonResult {
  ControlPath phi_star;
  ActionReport report;  ///< value = |phi*|^2_{L^2(0,T;H)} / 2, residual_path = phi*
  Trajectory path;
  double objective = 0.0;
  double endpoint_error = 0.0;
  double penalty = 0.0;
  int iterations = 0;
  bool converged = false;  ///< false: best iterate returned after hitting the limits
};

/// J(phi) = |phi|^2_{L^2}/2 + penalty |u^phi(T) - target|_H^2 for the exponential Euler
/// discretization, with its exact discrete gradient.
struct ControlObjective {
  SpectralField u0;
  SpectralField target;
  IntegratorConfig cfg;
  double penalty = 1.0;

  double value(const ControlPath& phi) const;
  /// Gradient in the Euclidean pairing sum_n Re<g_n, d_n>; also returns J.
  double gradient(const ControlPath& phi, ControlPath& grad) const;
};

/// Minimize J by gradient descent (Barzilai-Borwein step, Armijo backtracking), doubling
/// the penalty until the endpoint error is below tolerance. The forward model is always
/// exponential Euler with cfg.dt.
InstantonResult minimize_action(const SpectralField& u0, const SpectralField& target, double horizon,
                                const IntegratorConfig& cfg, const OptimizerSettings& opt = {},
                                const std::optional<ControlPath>& initial = std::nullopt);

struct GradientCheck {
  std::vector<double> adjoint;
  std::vector<double> finite_difference;
  double max_rel_error = 0.0;
};
/// Adjoint directional derivatives against central differences along random directions.
GradientCheck gradient_check(const ControlObjective& objective, const ControlPath& phi, int directions,
                             const RngStream& rng, double step = 1e-6);

/// min (1/2)|phi|^2 subject to the heat equation reaching target at T, per mode:
/// sum_k |k|^2 |Delta_k|^2 / (1 - exp(-2|k|^2 T)), Delta_k = target_k - exp(-|k|^2 T) u0_k.
double linear_minimum_action(const SpectralField& u0, const SpectralField& target, double horizon);

struct ConvergenceReport {
  std::string metric;
  std::vector<double> epsilons;
  std::vector<double> deltas;
  std::vector<double> distances;  ///< replica means
  std::vector<double> stderrs;
  std::vector<std::vector<double>> samples;
  int replicas = 0;
  stats::SlopeFit fit;  ///< log distance against log epsilon over epsilon > 0
  /// Fitted slope > 2 standard errors.
  bool decreasing() const { return fit.slope > 2.0 * fit.slope_stderr; }
};

struct FamilySpec {
  std::vector<double> epsilons;
  double gamma = 1.0;
  DeltaSchedule schedule{};
  double eta = 1.0;
  int replicas = 32;
};

/// Constraint checks; throw ValidationError naming the violated condition.
void validate_theorem1(const FamilySpec& family);
struct BesovParams {
  double sigma = -0.25;
  double p = 4.0;
  double alpha = 0.4;
  double beta = 2.5;
};
void validate_besov_params(const BesovParams& b);
void validate_theorem2(const FamilySpec& family, const BesovParams& b, double theta);

/// Pathwise coupling of u^phi_eps (solve_controlled, replica stream r shared across eps)
/// with the skeleton u^phi; mean over replicas of sup_t |u^phi_eps - u^phi|_H.
ConvergenceReport convergence_theorem1(const SpectralField& u0, const ControlPath& phi, const FamilySpec& family,
                                       const IntegratorConfig& cfg, const RngStream& rng,
                                       bool allow_scaling_violation = false);
/// As above with distances in sup_t |.|_{B^sigma_p}; u0 must lie in H^theta.
ConvergenceReport convergence_theorem2(const SpectralField& u0, const ControlPath& phi, const BesovParams& besov,
                                       double theta, const FamilySpec& family, const IntegratorConfig& cfg,
                                       const RngStream& rng, int grid_factor = 2);

/// E |z (x) z - eps theta I|_{H^sigma} over stationary samples for each family member.
ConvergenceReport renormalized_square_convergence(int cutoff, const FamilySpec& family, double sigma,
                                                  DealiasRule rule, const RngStream& rng);

struct TubeRow {
  double radius = 0.0;
  std::size_t hits = 0;
  std::size_t trials = 0;
  double p_hat = 0.0;
  std::optional<double> ci_low;  ///< absent when there are no hits
  double ci_high = 1.0;
};
/// Fraction of solve_stochastic paths within each radius of `center` in sup-H norm.
/// One sample set serves every radius.
std::vector<TubeRow> tube_probability(const SpectralField& u0, const Trajectory& center,
                                      const std::vector<double>& radii, const NoiseSpec& spec, int replicas,
                                      const IntegratorConfig& cfg, const RngStream& rng);

struct LaplaceFunctional {
  enum class Kind { zero, constant, clipped_endpoint };
  Kind kind = Kind::zero;
  double constant = 0.0;
  SpectralField target;
  double clip = 1.0;

  double operator()(const SpectralField& endpoint) const;
};

struct LaplaceRow {
  double epsilon = 0.0;
  double delta = 0.0;
  double lhs = 0.0;
  double lhs_stderr = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double ess = 0.0;
  bool flagged = false;  ///< effective sample size below 1% of replicas
};
struct LaplaceReport {
  std::vector<LaplaceRow> rows;
  double rhs = 0.0;
  std::vector<double> family_s;
  std::vector<double> family_values;
};
/// -eps log E exp(-Gamma(u_eps)/eps) against min over the endpoints
/// y_s = (1-s) y_free + s target of Gamma(y_s) + I*(y_s).
LaplaceReport laplace_check(const SpectralField& u0, const LaplaceFunctional& functional, double horizon,
                            const FamilySpec& family, const IntegratorConfig& cfg, const RngStream& rng,
                            const OptimizerSettings& opt = {}, int family_points = 6);

}  // namespace nsldp
