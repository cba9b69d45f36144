#include <cmath>

#include "doctest.h"
#include "nsldp/dynamics.hpp"
#include "nsldp/errors.hpp"
#include "nsldp/presets.hpp"

using namespace nsldp;

namespace {

IntegratorConfig linear_cfg(double dt) {
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.nonlinear = false;
  return cfg;
}

double max_diff(const SpectralField& a, const SpectralField& b) { return h_norm(a - b); }

}  // namespace

TEST_CASE("step_count") {
  CHECK(step_count(0.5, 0.005) == 100);
  CHECK(step_count(1.0, 0.25) == 4);
  CHECK_THROWS_AS(step_count(0.5, 0.3), DomainError);
}

TEST_CASE("linear skeleton is exact for constant forcing") {
  const int n = 6;
  const SpectralField u0 = random_low(n, 1);
  const SpectralField f = shear_mix(n, 0.7);
  const double dt = 0.05, T = 0.5;
  for (Scheme s : {Scheme::exponential_euler, Scheme::etd2}) {
    IntegratorConfig cfg = linear_cfg(dt);
    cfg.scheme = s;
    const Trajectory tr = solve_skeleton(u0, ControlPath::constant(f, dt, step_count(T, dt)), cfg);
    const SpectralField exact = heat_semigroup(u0, T) + f.scaled([&](Wavenumber k) {
      const double l = k.norm2();
      return -std::expm1(-l * T) / l;
    });
    CHECK(max_diff(tr.final_state(), exact) < 1e-13);
  }
}

TEST_CASE("Duhamel map matches the closed form") {
  const SpectralField f = shear_mix(5, 1.0);
  const Trajectory g = duhamel_gamma(ControlPath::constant(f, 0.1, 3));
  const SpectralField exact = f.scaled([](Wavenumber k) { return -std::expm1(-k.norm2() * 0.3) / k.norm2(); });
  CHECK(max_diff(g.final_state(), exact) < 1e-14);
}

TEST_CASE("unforced Navier-Stokes dissipates energy") {
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.record_diagnostics = true;
  const SpectralField u0 = shear_mix(12, 3.0);
  const Trajectory tr = solve_skeleton(u0, ControlPath::zero(12, 0.01, 50), cfg);
  for (int s = 1; s <= tr.steps(); ++s) CHECK(h_norm(tr.states[s]) <= h_norm(tr.states[s - 1]));
  REQUIRE(tr.diagnostics.size() == tr.states.size());
  double worst = 0.0;
  for (const auto& d : tr.diagnostics) worst = std::max(worst, std::abs(d.energy_residual));
  CHECK(worst < 1e-2 * h_norm(u0) * h_norm(u0));
}

TEST_CASE("second-order scheme converges faster") {
  const SpectralField u0 = shear_mix(8, 2.0);
  const SpectralField f = random_low(8, 2);
  auto final_at = [&](Scheme s, double dt) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.scheme = s;
    return solve_skeleton(u0, ControlPath::constant(f, dt, step_count(0.4, dt)), cfg).final_state();
  };
  const SpectralField ref = final_at(Scheme::etd2, 1e-4);
  const double e1 = max_diff(final_at(Scheme::exponential_euler, 0.02), ref);
  const double e1h = max_diff(final_at(Scheme::exponential_euler, 0.01), ref);
  const double e2 = max_diff(final_at(Scheme::etd2, 0.02), ref);
  const double e2h = max_diff(final_at(Scheme::etd2, 0.01), ref);
  CHECK(std::log2(e1 / e1h) == doctest::Approx(1.0).epsilon(0.2));
  CHECK(std::log2(e2 / e2h) == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("stochastic solves are reproducible and seed dependent") {
  NoiseSpec spec;
  spec.epsilon = 0.05;
  spec.delta = 0.1;
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  const SpectralField u0 = shear_mix(8, 1.0);
  const Trajectory a = solve_stochastic(u0, spec, 0.2, cfg, RngStream(5));
  const Trajectory b = solve_stochastic(u0, spec, 0.2, cfg, RngStream(5));
  const Trajectory c = solve_stochastic(u0, spec, 0.2, cfg, RngStream(6));
  CHECK(a.states == b.states);
  CHECK(max_diff(a.final_state(), c.final_state()) > 0.0);
  CHECK(a.final_state().is_real());
  CHECK(a.metadata.seed == 5);
}

TEST_CASE("zero noise reduces the controlled equation to the skeleton") {
  NoiseSpec spec;
  spec.delta = 0.0;
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  const SpectralField u0 = shear_mix(8, 1.0);
  const ControlPath phi = ControlPath::constant(random_low(8, 3), 0.01, 20);
  const Trajectory sk = solve_skeleton(u0, phi, cfg);
  const Trajectory co = solve_controlled(u0, phi, spec, cfg, RngStream(1));
  CHECK(max_diff(sk.final_state(), co.final_state()) < 1e-14);
}

TEST_CASE("shifted decomposition reproduces the controlled solution") {
  NoiseSpec spec;
  spec.epsilon = 0.01;
  spec.delta = 0.05;
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  const SpectralField u0 = shear_mix(8, 1.0);
  const ControlPath phi = ControlPath::sampled([](double t) { return (1.0 + t) * random_low(8, 4); }, 0.01, 20);
  const RngStream rng(31);
  const ShiftedSolution sh = solve_shifted(u0, phi, spec, 0.0, cfg, rng, true);
  const Trajectory co = solve_controlled(u0, phi, spec, cfg, rng);
  CHECK(max_diff(sh.sum.final_state(), co.final_state()) < 1e-12);
  REQUIRE(sh.monitor.has_value());
  CHECK(sh.monitor->holds);
  CHECK(sh.monitor->lhs.size() == sh.v.states.size());
}

TEST_CASE("grid and blowup errors") {
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  const SpectralField u0 = shear_mix(8, 1.0);
  CHECK_THROWS(solve_skeleton(u0, ControlPath::zero(8, 0.02, 5), cfg));
  cfg.dt = 0.5;
  cfg.blowup = 10.0;
  CHECK_THROWS_AS(solve_skeleton(shear_mix(8, 1e3), ControlPath::zero(8, 0.5, 4), cfg), IntegrationError);
}

TEST_CASE("path metrics") {
  const SpectralField a = shear_mix(8, 1.0), b = random_low(8, 1);
  CHECK(field_distance(a, b, {}) == doctest::Approx(h_norm(a - b)));
  MetricSpec m{PathMetric::besov, -0.25, 4.0, 2};
  CHECK(field_distance(a, b, m) == doctest::Approx(besov_norm(a - b, -0.25, 4.0)));
  const ControlPath phi = ControlPath::constant(a, 0.1, 4);
  CHECK(phi.l2_norm_squared() == doctest::Approx(0.4));
  CHECK(phi.in_ball(0.5));
  CHECK_FALSE(phi.in_ball(0.3));
}
