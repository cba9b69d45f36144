// Acceptance suite: one PASS/FAIL line per criterion, tolerances and runtime budgets
// pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "nsldp/dynamics.hpp"
#include "nsldp/harness.hpp"
#include "nsldp/io.hpp"
#include "nsldp/ldp.hpp"
#include "nsldp/noise.hpp"
#include "nsldp/nonlinearity.hpp"
#include "nsldp/presets.hpp"
#include "oracles.hpp"

using namespace nsldp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... T>
std::string fmtn(const char* f, T... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// 1
Outcome exact_identities() {
  constexpr int kN = 32, kFields = 100;
  constexpr double kTolEnergy = 1e-12, kTolEnstrophy = 1e-11;
  const DealiasRule rule = DealiasRule::two_thirds();
  RngStream rng(101);
  double worst_e = 0.0, worst_z = 0.0;
  for (int i = 0; i < kFields; ++i) {
    const SpectralField u = truncate(random_field(kN, rng, 2.0 * kN, 1.0), rule.effective_cutoff(kN));
    const SpectralField b = b_self(u, rule);
    const double hv = h_norm(u), vv = v_norm(u);
    worst_e = std::max(worst_e, std::abs(real_inner(b, u)) / (vv * vv * hv));
    worst_z = std::max(worst_z, std::abs(real_inner(b, stokes_apply(u))) / (vv * vv * vv));
  }
  return {worst_e <= kTolEnergy && worst_z <= kTolEnstrophy,
          fmtn("max |<b(u),u>|/(|u|_V^2|u|_H)=%.2e (tol %.0e), max |<b(u),Au>|/|u|_V^3=%.2e (tol %.0e)", worst_e,
               kTolEnergy, worst_z, kTolEnstrophy)};
}

// 2
Outcome oracle_equivalence() {
  constexpr int kN = 8, kPairs = 20;
  constexpr double kTol = 1e-12;
  RngStream rng(202);
  double worst = 0.0;
  for (DealiasRule rule : {DealiasRule::two_thirds(), DealiasRule::none()}) {
    for (int i = 0; i < kPairs; ++i) {
      const SpectralField u = random_field(kN, rng, 2.0 * kN, 0.5);
      const SpectralField v = random_field(kN, rng, 2.0 * kN, 0.5);
      const SpectralField fast = b_bilinear(u, v, rule);
      const SpectralField ref = oracle::direct_b(u, v, rule.effective_cutoff(kN));
      worst = std::max(worst, (fast - ref).max_abs() / ref.max_abs());
    }
  }
  return {worst <= kTol, fmtn("max relative deviation %.2e over %d pairs x 2 rules (tol %.0e)", worst, kPairs, kTol)};
}

// 3
Outcome ou_law() {
  constexpr int kN = 16, kReplicas = 10000;
  constexpr double kVarTol = 0.05, kSignificance = 0.01, kStep = 0.05;
  NoiseSpec spec;
  spec.epsilon = 0.5;
  spec.delta = 0.1;
  spec.gamma = 1.0;
  bool ok = true;
  std::string detail;
  for (double alpha : {0.0, 1.0}) {
    const auto rep = ou_law_check(kN, spec, alpha, kStep, kReplicas, RngStream(303, std::uint64_t(alpha)));
    ok = ok && rep.max_rel_error <= kVarTol && rep.ks_pvalue > kSignificance;
    detail += fmtn("alpha=%g: max var err %.3f at (%d,%d), KS p=%.3f; ", alpha, rep.max_rel_error, rep.worst.k1,
                   rep.worst.k2, rep.ks_pvalue);
  }
  return {ok, detail + fmtn("tol %.2f, significance %.2f", kVarTol, kSignificance)};
}

// 4
Outcome renormalization_constant() {
  constexpr double kAgree = 1e-8, kSigmas = 3.0;
  constexpr int kReplicas = 10000, kN = 16;
  bool ok = true;
  std::string detail;
  for (double delta : {1e-1, 1e-2}) {
    const auto a = renorm_constant(delta, 1.0, 128);
    const auto b = renorm_constant(delta, 1.0, 256);
    const auto sums = renorm_lattice_sum(delta, 1.0, 128);
    const double diff = std::abs(a.value - b.value);
    const bool sym = sums.k1_weighted == sums.k2_weighted;
    ok = ok && diff <= kAgree && sym;
    detail += fmtn("delta=%g: theta=%.12f |diff|=%.1e raw-sum diff=%.1e sym=%s; ", delta, b.value, diff,
                   std::abs(a.lattice_sum - b.lattice_sum), sym ? "exact" : "broken");
  }
  NoiseSpec spec;
  spec.epsilon = 1.0;
  spec.delta = 0.1;
  const auto w = wick_zero_mode_check(kN, spec, DealiasRule::two_thirds(), kReplicas, RngStream(404));
  const double z11 = std::abs(w.d11.mean) / w.d11.stderr_;
  const double z22 = std::abs(w.d22.mean) / w.d22.stderr_;
  const double z12 = std::abs(w.off12.mean) / w.off12.stderr_;
  ok = ok && z11 <= kSigmas && z22 <= kSigmas && z12 <= kSigmas;
  detail += fmtn("Wick zero mode |mean|/stderr: 11=%.2f 22=%.2f 12=%.2f (tol %.0f)", z11, z22, z12, kSigmas);
  return {ok, detail};
}

// 5
Outcome lp_log_moment() {
  constexpr int kN = 16, kReplicas = 10000;
  constexpr double kTol = 0.05, kMaxVariation = 3.0;
  double worst = 0.0, lo = 1e300, hi = 0.0;
  for (double delta : {1e-1, 1e-2, 1e-3, 1e-4}) {
    NoiseSpec spec;
    spec.epsilon = 0.1;
    spec.delta = delta;
    spec.gamma = 1.0;
    const auto rep = lp_log_moment_check(kN, spec, 2.0, 0.1, kReplicas, RngStream(505, std::uint64_t(-std::log10(delta))));
    worst = std::max(worst, std::abs(rep.estimate / rep.closed_form - 1.0));
    lo = std::min(lo, rep.ratio);
    hi = std::max(hi, rep.ratio);
  }
  return {worst <= kTol && hi / lo < kMaxVariation,
          fmtn("max |MC/closed-1|=%.4f (tol %.2f); ratio range [%.3f, %.3f], variation %.2f (< %.0f)", worst, kTol, lo,
               hi, hi / lo, kMaxVariation)};
}

SpectralField forcing_shape(int n) { return random_low(n, 77, 1.0); }

// 6
Outcome skeleton_action_duality() {
  constexpr int kN = 16;
  constexpr double kT = 0.5, kMaxGap = 0.02, kMinOrder = 1.0;
  const SpectralField u0 = shear_mix(kN, 1.0);
  const SpectralField shape = forcing_shape(kN);
  auto phi_at = [&](double t) { return std::cos(std::numbers::pi * t) * shape; };
  const double exact = 0.5 * real_inner(shape, shape) * 0.25;  // int_0^{1/2} cos^2(pi t) dt = 1/4
  std::vector<double> dts{1e-2, 5e-3, 2.5e-3}, gaps;
  for (double dt : dts) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    const ControlPath phi = ControlPath::sampled(phi_at, dt, step_count(kT, dt));
    const double a = action(solve_skeleton(u0, phi, cfg), cfg.dealias).value;
    gaps.push_back(std::abs(a - exact) / exact);
  }
  const double order = stats::loglog_slope(dts, gaps, {}).slope;
  return {order >= kMinOrder && gaps.back() <= kMaxGap,
          fmtn("relative gaps %.3e %.3e %.3e, observed order %.2f (>= %.1f), finest gap <= %.2f", gaps[0], gaps[1],
               gaps[2], order, kMinOrder, kMaxGap)};
}

// 7
Outcome adjoint_gradient() {
  constexpr int kN = 8, kDirections = 10;
  constexpr double kT = 0.25, kTol = 1e-5;
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  RngStream rng(707);
  ControlObjective obj{shear_mix(kN, 1.0), random_low(kN, 3, 0.8), cfg, 5.0};
  ControlPath phi = ControlPath::zero(kN, cfg.dt, step_count(kT, cfg.dt));
  for (auto& v : phi.values) v = random_field(kN, rng, 6.0, 1.0);
  const auto chk = gradient_check(obj, phi, kDirections, rng.substream(1));
  return {chk.max_rel_error <= kTol, fmtn("max relative error %.2e over %d directions (tol %.0e)", chk.max_rel_error,
                                          kDirections, kTol)};
}

ControlPath smooth_control(int n, double dt, double horizon) {
  const SpectralField shape = forcing_shape(n);
  return ControlPath::sampled([&](double t) { return (1.0 + std::sin(2.0 * std::numbers::pi * t)) * shape; }, dt,
                              step_count(horizon, dt));
}

std::string slope_detail(const ConvergenceReport& r) {
  std::string s;
  for (std::size_t i = 0; i < r.epsilons.size(); ++i)
    s += fmtn("eps=%g: %.3e+-%.1e; ", r.epsilons[i], r.distances[i], r.stderrs[i]);
  return s + fmtn("slope %.3f +- %.3f (need > 2 se)", r.fit.slope, r.fit.slope_stderr);
}

// 8
Outcome h_distance_trend() {
  constexpr int kN = 16;
  constexpr double kT = 0.5;
  IntegratorConfig cfg;
  cfg.dt = 5e-3;
  FamilySpec fam;
  fam.epsilons = {1e-1, 1e-2, 1e-3, 1e-4};
  fam.schedule = {1.0, 0.5};
  fam.eta = 1.0;
  fam.replicas = 32;
  const auto rep = convergence_theorem1(shear_mix(kN, 1.0), smooth_control(kN, cfg.dt, kT), fam, cfg, RngStream(808));
  return {rep.decreasing(), slope_detail(rep)};
}

// 9
Outcome besov_distance_trend() {
  constexpr int kN = 16;
  constexpr double kT = 0.5;
  IntegratorConfig cfg;
  cfg.dt = 5e-3;
  FamilySpec fam;
  fam.epsilons = {1e-1, 1e-2, 1e-3, 1e-4};
  fam.schedule = {1.0, 1.0};
  fam.replicas = 32;
  const BesovParams besov{-0.25, 4.0, 0.4, 2.5};
  validate_besov_params(besov);
  const auto rep = convergence_theorem2(shear_mix(kN, 1.0), smooth_control(kN, cfg.dt, kT), besov, 1.0, fam, cfg,
                                        RngStream(909));
  return {rep.decreasing(), slope_detail(rep)};
}

// 10
Outcome renormalized_square() {
  FamilySpec fam;
  fam.epsilons = {1e-1, 1e-2, 1e-3};
  fam.schedule = {1.0, 1.0};
  fam.replicas = 1000;
  const auto rep = renormalized_square_convergence(16, fam, -0.5, DealiasRule::two_thirds(), RngStream(1010));
  return {rep.decreasing(), slope_detail(rep)};
}

// 11
Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "nsldp_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::string> configs = {
      R"({"schema_version": 1, "kind": "ou_checks",
          "numerics": {"N": 8, "dt": 0.05},
          "noise": {"epsilon": 0.5, "gamma": 1.0, "schedule": {"coefficient": 0.1, "exponent": 0.0}},
          "statistics": {"replicas": 200, "seed": 11}})",
      R"({"schema_version": 1, "kind": "theorem1",
          "numerics": {"N": 8, "dt": 0.01, "T": 0.2},
          "noise": {"gamma": 1.0, "schedule": {"coefficient": 1.0, "exponent": 0.5}, "eta": 1.0},
          "statistics": {"replicas": 4, "seed": 12},
          "params": {"epsilons": [0.1, 0.01]}})"};
  bool ok = true;
  int files = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ExperimentConfig cfg = parse_config(configs[i]);
    const RunRecord a = run(cfg, root / ("a" + std::to_string(i)));
    const RunRecord b = run(cfg, root / ("b" + std::to_string(i)));
    ok = ok && a.config_hash == b.config_hash && a.result_files.size() == b.result_files.size();
    for (std::size_t f = 0; ok && f < a.result_files.size(); ++f) {
      if (fs::path(a.result_files[f]).extension() != ".csv") continue;
      ++files;
      ok = ok && read_file(a.result_files[f]) == read_file(b.result_files[f]);
    }
  }
  fs::remove_all(root);
  return {ok && files > 0, fmtn("%d CSV files compared byte-for-byte across repeated runs", files)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "exact identities", 10, exact_identities},
      {2, "oracle equivalence", 10, oracle_equivalence},
      {3, "OU law", 60, ou_law},
      {4, "renormalization constant", 120, renormalization_constant},
      {5, "L^p log-moment lemma", 120, lp_log_moment},
      {6, "skeleton/action duality", 60, skeleton_action_duality},
      {7, "adjoint gradient", 60, adjoint_gradient},
      {8, "H-norm convergence trend", 900, h_distance_trend},
      {9, "Besov-norm convergence trend", 900, besov_distance_trend},
      {10, "renormalized square convergence", 600, renormalized_square},
      {11, "determinism", 60, determinism},
  };
  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failures = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = out.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s [%d] %s: %s; %.2fs (budget %.0fs)\n", pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(),
                secs, c.budget_seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
