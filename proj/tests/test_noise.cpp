#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nsldp/errors.hpp"
#include "nsldp/noise.hpp"
#include "nsldp/stats.hpp"

using namespace nsldp;

TEST_CASE("delta schedule and covariance weights") {
  const DeltaSchedule s{2.0, 0.5};
  CHECK(s(0.04) == doctest::Approx(0.4));
  CHECK(s(0.0) == 0.0);
  CHECK(s.vanishes());
  CHECK(s.satisfies_scaling(1.0));
  CHECK_FALSE(DeltaSchedule{1.0, 1.0}.satisfies_scaling(1.0));
  const NoiseSpec spec = NoiseSpec::scheduled(0.01, 1.5, s);
  CHECK(spec.delta == doctest::Approx(0.2));
  const Wavenumber k{1, 2};
  CHECK(spec.lambda(k) == doctest::Approx(1.0 / std::sqrt(1.0 + 0.2 * std::pow(5.0, 1.5))));
  CHECK(ou_stationary_variance(k, spec, 1.0) ==
        doctest::Approx(0.01 * spec.lambda(k) * spec.lambda(k) / (2.0 * 6.0)));
}

TEST_CASE("Wiener increments have the prescribed mode variance") {
  NoiseSpec spec;
  spec.epsilon = 1.0;
  spec.delta = 0.3;
  RngStream rng(21);
  const Wavenumber k{2, 1};
  const int reps = 20000;
  double acc = 0.0;
  for (int r = 0; r < reps; ++r) {
    const SpectralField dw = wiener_increment(4, spec, 0.1, rng);
    CHECK(dw.is_real());
    acc += std::norm(dw[k]);
  }
  const double expect = spec.lambda(k) * spec.lambda(k) * 0.1;
  CHECK(acc / reps == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("stationary OU samples match the closed-form energy") {
  NoiseSpec spec;
  spec.epsilon = 0.2;
  spec.delta = 0.05;
  RngStream rng(22);
  std::vector<double> e;
  for (int r = 0; r < 4000; ++r) {
    const SpectralField z = ou_stationary_sample(6, spec, 0.5, rng);
    e.push_back(h_norm(z) * h_norm(z));
  }
  const auto ms = stats::mean_stderr(e);
  CHECK(std::abs(ms.mean - ou_mean_energy(6, spec, 0.5)) < 4.0 * ms.stderr_);
  CHECK_THROWS_AS(ou_stationary_sample(6, spec, -1.0, rng), DomainError);
}

TEST_CASE("zero noise leaves ou_step deterministic") {
  NoiseSpec spec;
  spec.delta = 0.1;
  RngStream rng(23);
  const SpectralField z = SpectralField::real_mode(4, {1, 1}, 1.0);
  CHECK(ou_step(z, spec, 0.0, 0.5, rng) == heat_semigroup(z, 0.5));
}

TEST_CASE("renormalization sums") {
  const auto s = renorm_lattice_sum(0.1, 1.0, 64);
  CHECK(s.k1_weighted == s.k2_weighted);
  // direct oracle sum
  double direct = 0.0;
  for (int k1 = -16; k1 <= 16; ++k1)
    for (int k2 = -16; k2 <= 16; ++k2) {
      if (!k1 && !k2) continue;
      const double n2 = k1 * k1 + k2 * k2;
      direct += k1 * k1 / (n2 * n2) / (1.0 + 0.1 * n2);
    }
  direct /= 2.0 * std::pow(2.0 * std::numbers::pi, 2);
  CHECK(renorm_lattice_sum(0.1, 1.0, 16).k1_weighted == doctest::Approx(direct).epsilon(1e-13));
  const auto a = renorm_constant(0.1, 1.0, 128), b = renorm_constant(0.1, 1.0, 256);
  CHECK(std::abs(a.value - b.value) < 1e-8);
  CHECK(a.lattice_sum < b.lattice_sum);
  CHECK_THROWS_AS(renorm_constant(0.0, 1.0, 64), DomainError);
  try {
    renorm_constant(0.01, 1.0, 8, 1e-14);
    FAIL("expected TailToleranceError");
  } catch (const TailToleranceError& e) {
    CHECK(e.required_cutoff() > 8);
  }
}

TEST_CASE("Wick constant enters the zero mode diagonal") {
  NoiseSpec spec;
  spec.epsilon = 0.3;
  spec.delta = 0.1;
  const SpectralField z(8);
  const TensorField w = wick_square(z, spec, DealiasRule::two_thirds());
  const double c = wick_constant(8, spec, DealiasRule::two_thirds());
  CHECK(c > 0.0);
  CHECK(w(0, 0, 0, 0).real() == doctest::Approx(-c));
  CHECK(w(1, 1, 0, 0).real() == doctest::Approx(-c));
  CHECK(std::abs(w(0, 1, 0, 0)) == 0.0);
}

TEST_CASE("lattice bounds") {
  NoiseSpec spec;
  spec.epsilon = 0.1;
  spec.delta = 0.01;
  const auto lam = lambda_beta_bound(spec, 0.2, 128);
  CHECK(std::isfinite(lam.value));
  CHECK(lam.value == doctest::Approx(lambda_beta_bound(spec, 0.2, 256).value).epsilon(1e-3));
  CHECK_THROWS_AS(lambda_beta_bound(spec, 0.3, 64), DomainError);
  const auto rhs = besov_rhs_sum(-0.25, 128);
  CHECK(rhs.value == doctest::Approx(besov_rhs_sum(-0.25, 256).value).epsilon(1e-3));
}
