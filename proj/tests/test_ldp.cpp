#include <cmath>

#include "doctest.h"
#include "nsldp/errors.hpp"
#include "nsldp/ldp.hpp"
#include "nsldp/presets.hpp"

using namespace nsldp;

TEST_CASE("action of a skeleton path recovers the control energy") {
  IntegratorConfig cfg;
  cfg.dt = 2.5e-3;
  const SpectralField u0 = shear_mix(8, 1.0);
  const ControlPath phi = ControlPath::sampled([](double t) { return std::cos(t) * random_low(8, 5); }, cfg.dt, 200);
  const ActionReport rep = action(solve_skeleton(u0, phi, cfg));
  CHECK(rep.value == doctest::Approx(0.5 * phi.l2_norm_squared()).epsilon(0.02));
}

TEST_CASE("action sequence flags divergence") {
  CHECK(action_sequence({0.1, 0.05, 0.025}, {10.0, 20.0, 40.0}).diverging);
  CHECK_FALSE(action_sequence({0.1, 0.05, 0.025}, {1.0, 1.0, 1.0}).diverging);
}

TEST_CASE("minimum action matches the linear-quadratic oracle") {
  IntegratorConfig cfg;
  cfg.dt = 2.5e-3;
  cfg.nonlinear = false;
  const SpectralField u0 = shear_mix(4, 0.5);
  const SpectralField target = random_low(4, 6, 0.5);
  OptimizerSettings opt;
  opt.endpoint_tol = 1e-5;
  opt.max_iterations = 2000;
  const InstantonResult res = minimize_action(u0, target, 0.25, cfg, opt);
  CHECK(res.endpoint_error < 1e-5);
  CHECK(res.report.value == doctest::Approx(linear_minimum_action(u0, target, 0.25)).epsilon(0.02));
}

TEST_CASE("adjoint gradient matches finite differences") {
  IntegratorConfig cfg;
  cfg.dt = 0.02;
  ControlObjective obj{shear_mix(6, 1.0), random_low(6, 8), cfg, 3.0};
  const ControlPath phi = ControlPath::constant(random_low(6, 9, 0.3), 0.02, 10);
  const GradientCheck g = gradient_check(obj, phi, 4, RngStream(10));
  CHECK(g.max_rel_error < 1e-5);
}

TEST_CASE("scaling constraints are validated") {
  FamilySpec f;
  f.epsilons = {0.1, 0.01};
  f.schedule = {1.0, 1.0};
  f.eta = 1.0;
  CHECK_THROWS_AS(validate_theorem1(f), ValidationError);
  f.schedule = {1.0, 0.5};
  CHECK_NOTHROW(validate_theorem1(f));
  f.schedule = {1.0, 0.0};
  CHECK_THROWS_AS(validate_theorem1(f), ValidationError);
  CHECK_NOTHROW(validate_besov_params({}));
  try {
    validate_besov_params({-0.9, 4.0, 0.4, 2.5});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.constraint() == "sigma > -2/p v (2/p - 1)");
  }
  CHECK_THROWS_AS(validate_besov_params({-0.25, 4.0, 0.6, 2.5}), ValidationError);
  f.schedule = {1.0, 1.0};
  CHECK_THROWS_AS(validate_theorem2(f, {}, 0.0), ValidationError);
  CHECK_NOTHROW(validate_theorem2(f, {}, 1.0));
}

TEST_CASE("convergence experiment shrinks with epsilon") {
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  FamilySpec f;
  f.epsilons = {1e-1, 1e-3};
  f.schedule = {1.0, 0.5};
  f.replicas = 4;
  const SpectralField u0 = shear_mix(8, 1.0);
  const ControlPath phi = ControlPath::constant(random_low(8, 2), 0.01, 20);
  const ConvergenceReport rep = convergence_theorem1(u0, phi, f, cfg, RngStream(3));
  REQUIRE(rep.distances.size() == 2);
  CHECK(rep.distances[1] < rep.distances[0]);
  CHECK(rep.samples[0].size() == 4);
}

TEST_CASE("tube probabilities are monotone in the radius") {
  IntegratorConfig cfg;
  cfg.dt = 0.02;
  NoiseSpec spec;
  spec.epsilon = 0.01;
  spec.delta = 0.1;
  const SpectralField u0 = shear_mix(4, 1.0);
  const Trajectory center = solve_skeleton(u0, ControlPath::zero(4, 0.02, 10), cfg);
  const auto rows = tube_probability(u0, center, {0.05, 0.2, 1.0}, spec, 1000, cfg, RngStream(4));
  CHECK(rows[0].hits <= rows[1].hits);
  CHECK(rows[1].hits <= rows[2].hits);
  CHECK(rows[2].p_hat == doctest::Approx(1.0));
  CHECK_THROWS(tube_probability(u0, center, {0.1}, spec, 10, cfg, RngStream(4)));
}
