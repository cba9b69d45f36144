#pragma once

// Time integration of the stochastic, controlled, skeleton and shifted random
// equations on the Galerkin lattice. All schemes are exponential integrators:
// the Stokes part is exact per mode, and noise enters through the exact OU
// transition with alpha = 0.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nsldp/noise.hpp"
#include "nsldp/nonlinearity.hpp"
#include "nsldp/rng.hpp"
#include "nsldp/spectral.hpp"

namespace nsldp {

/// Number of steps of size dt covering [0, T]; T must be a multiple of dt.
int step_count(double horizon, double dt);

/// Control sampled at the grid nodes t_n = n dt, n = 0..steps. On [t_n, t_{n+1}) the
/// control is taken to be values[n]; values.back() only feeds second-order schemes.
struct ControlPath {
  double dt = 0.0;
  std::vector<SpectralField> values;

  static ControlPath zero(int cutoff, double dt, int steps);
  static ControlPath constant(const SpectralField& phi, double dt, int steps);
  static ControlPath sampled(const std::function<SpectralField(double)>& phi, double dt, int steps);

  int steps() const { return int(values.size()) - 1; }
  int cutoff() const { return values.empty() ? 0 : values.front().cutoff(); }
  double horizon() const { return dt * steps(); }
  /// int_0^T |phi|_H^2 dt for the piecewise-constant path.
  double l2_norm_squared() const;
  /// Membership in S^gamma_T.
  bool in_ball(double gamma) const { return l2_norm_squared() <= gamma; }
  /// Mode-wise multiplier applied to every sample.
  ControlPath reweighted(const NoiseSpec& spec) const;
};

struct TrajectoryMetadata {
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::string scheme = "exponential_euler";
};

struct DiagnosticRow {
  double t = 0.0;
  double h_norm = 0.0;
  double v_norm = 0.0;
  double l4_norm = 0.0;
  /// Step budget Delta(|u|^2/2) + dt <|u|_V^2> - dt <phi, u>, trapezoid averages.
  double energy_residual = 0.0;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<SpectralField> states;
  TrajectoryMetadata metadata;
  std::vector<DiagnosticRow> diagnostics;

  int steps() const { return int(states.size()) - 1; }
  double horizon() const { return dt * steps(); }
  int cutoff() const { return states.empty() ? 0 : states.front().cutoff(); }
  const SpectralField& final_state() const { return states.back(); }
};

enum class Scheme { exponential_euler, etd2 };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

struct IntegratorConfig {
  Scheme scheme = Scheme::exponential_euler;
  double dt = 1e-3;
  DealiasRule dealias{};
  /// Diagnostic switches: drop b, drop the noise injection.
  bool nonlinear = true;
  bool noise = true;
  double blowup = 1e6;
  bool record_diagnostics = false;
  int grid_factor = 2;

  /// Advective Courant limit dt * K * sup|u| recorded for the scheme.
  double courant_limit() const { return scheme == Scheme::etd2 ? 1.0 : 0.5; }
};

/// dt * K * max_x |u(x)| for the effective product lattice K.
double courant_number(const SpectralField& u, double dt, DealiasRule rule);

/// Gamma(phi)(t) = int_0^t exp((t-s)A) phi(s) ds, exact for piecewise-constant phi.
Trajectory duhamel_gamma(const ControlPath& phi);
/// Gamma applied to Q^{1/2} phi, i.e. lambda_k(delta) phi_k.
Trajectory phi_eps(const ControlPath& phi, const NoiseSpec& spec);

/// One step of u' = Au + b(u) + phi. For etd2 the forcing at the end of the step is
/// phi_next (defaults to phi_now).
SpectralField step_skeleton(const SpectralField& u, const SpectralField& phi_now, const IntegratorConfig& cfg,
                            double dt);
SpectralField step_skeleton(const SpectralField& u, const SpectralField& phi_now, const SpectralField& phi_next,
                            const IntegratorConfig& cfg, double dt);

Trajectory solve_skeleton(const SpectralField& u0, const ControlPath& phi, const IntegratorConfig& cfg);
Trajectory solve_stochastic(const SpectralField& u0, const NoiseSpec& spec, double horizon,
                            const IntegratorConfig& cfg, const RngStream& rng);
Trajectory solve_controlled(const SpectralField& u0, const ControlPath& phi, const NoiseSpec& spec,
                            const IntegratorConfig& cfg, const RngStream& rng);

/// Constants of the a-priori bound on v; they are not pinned, so the monitor checks
/// against C exp(c Z) (|u0|^2 + |z(0)|^2 + (alpha^2 + 1) Z + 1), Z = |z|^4_{L^4(0,t;L^4)}.
struct AprioriConstants {
  double prefactor = 2.0;
  double rate = 1.0;
};

struct AprioriMonitor {
  AprioriConstants constants;
  double max_ratio = 0.0;  ///< max over t of LHS / RHS
  bool holds = true;
  std::vector<double> lhs;
  std::vector<double> rhs;
};

struct ShiftedSolution {
  Trajectory v;
  Trajectory z;
  Trajectory phi;  ///< Phi_eps
  Trajectory sum;  ///< v + z + Phi_eps
  std::optional<AprioriMonitor> monitor;
};

/// Stream id from which the stationary z(0) is drawn; increments use the parent stream
/// exactly as solve_controlled does.
inline constexpr std::uint64_t kInitialOuStream = 0x5a17;

ShiftedSolution solve_shifted(const SpectralField& u0, const ControlPath& phi, const NoiseSpec& spec, double alpha,
                              const IntegratorConfig& cfg, const RngStream& rng, bool monitor = false,
                              AprioriConstants constants = {});

/// Left-Riemann int_0^T |u|_{L^4}^4 dt.
double l4_spacetime_norm4(const Trajectory& traj, int grid_factor = 2);
/// int_0^T |u|_{L^4}^4 dt to the power 1/4.
inline double l4_spacetime_norm(const Trajectory& traj, int grid_factor = 2) {
  return std::pow(l4_spacetime_norm4(traj, grid_factor), 0.25);
}

enum class PathMetric { h, besov };
struct MetricSpec {
  PathMetric kind = PathMetric::h;
  double sigma = 0.0;
  double p = 2.0;
  int grid_factor = 2;
};
double field_distance(const SpectralField& a, const SpectralField& b, const MetricSpec& metric);
/// sup over grid times of the metric distance; trajectories must share their grid.
double sup_distance(const Trajectory& a, const Trajectory& b, const MetricSpec& metric = {});

}  // namespace nsldp
