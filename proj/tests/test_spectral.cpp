#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nsldp/errors.hpp"
#include "nsldp/presets.hpp"
#include "nsldp/rng.hpp"
#include "nsldp/spectral.hpp"
#include "oracles.hpp"

using namespace nsldp;

namespace {

double max_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for_each_wavenumber(a.cutoff(), [&](Wavenumber k) { m = std::max(m, std::abs(a[k] - b[k])); });
  return m;
}

SpectralField sample(int n, std::uint64_t seed, double kmax = 1e9) {
  RngStream rng(seed);
  return random_field(n, rng, kmax);
}

}  // namespace

TEST_CASE("lattice indexing covers the square once") {
  const int n = 3;
  std::vector<int> seen(lattice_size(n), 0);
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2) ++seen[lattice_index(n, k1, k2)];
  for (int s : seen) CHECK(s == 1);
  int half = 0;
  for_each_half_wavenumber(n, [&](Wavenumber) { ++half; });
  CHECK(half == (int(lattice_size(n)) - 1) / 2);
}

TEST_CASE("velocity follows the basis formula") {
  const SpectralField u = sample(5, 1);
  const VectorSpectrum v = velocity(u);
  for_each_wavenumber(5, [&](Wavenumber k) {
    const auto ref = oracle::velocity_at(u, k.k1, k.k2);
    CHECK(std::abs(v.at(0, k.k1, k.k2) - ref.a) < 1e-15);
    CHECK(std::abs(v.at(1, k.k1, k.k2) - ref.b) < 1e-15);
  });
  CHECK(max_diff(leray_project(velocity(u)), u) < 1e-14);
}

TEST_CASE("random fields are real and divergence free") {
  const SpectralField u = sample(6, 2);
  CHECK(u.is_real());
  const VectorSpectrum v = velocity(u);
  for_each_wavenumber(6, [&](Wavenumber k) {
    CHECK(std::abs(double(k.k1) * v.at(0, k.k1, k.k2) + double(k.k2) * v.at(1, k.k1, k.k2)) < 1e-15);
  });
}

TEST_CASE("Stokes operator and heat semigroup act diagonally") {
  const Wavenumber k{2, -1};
  const SpectralField e = SpectralField::real_mode(4, k, {0.3, -0.7});
  CHECK(max_diff(stokes_apply(e), -5.0 * e) < 1e-15);
  CHECK(max_diff(heat_semigroup(e, 0.2), std::exp(-1.0) * e) < 1e-15);
  CHECK(max_diff(heat_semigroup(e, 0.2, 1.0), std::exp(-1.2) * e) < 1e-15);
  CHECK(max_diff(fractional_power(e, 0.5), std::sqrt(5.0) * e) < 1e-14);
  CHECK_THROWS_AS(heat_semigroup(e, -1.0), DomainError);
}

TEST_CASE("norms of a single mode") {
  const int n = 8;
  const Wavenumber k{3, 1};
  const SpectralField e = SpectralField::mode(n, k);
  CHECK(h_norm(e) == doctest::Approx(1.0));
  CHECK(v_norm(e) == doctest::Approx(std::sqrt(10.0)));
  // |e_k(x)| = 1/(2 pi) pointwise
  for (double p : {2.0, 3.0, 4.0, 6.0}) {
    const double expect = std::pow(2.0 * std::numbers::pi, 2.0 / p) / (2.0 * std::numbers::pi);
    CHECK(lp_norm(e, p) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("Parseval: L2 norm of the velocity equals the H norm") {
  const SpectralField u = sample(8, 3);
  CHECK(lp_norm(u, 2.0) == doctest::Approx(h_norm(u)).epsilon(1e-12));
  CHECK(lp_norm(u, 2.0, 3) == doctest::Approx(h_norm(u)).epsilon(1e-12));
}

TEST_CASE("dyadic blocks partition the lattice") {
  CHECK(dyadic_index({1, 0}) == 0);
  CHECK(dyadic_index({1, 1}) == 1);
  CHECK(dyadic_index({2, 0}) == 1);
  CHECK(dyadic_index({2, 1}) == 2);
  CHECK(dyadic_index({4, 0}) == 2);
  CHECK(dyadic_index({4, 1}) == 3);
  const SpectralField u = sample(10, 4);
  SpectralField sum(10);
  for (int q = 0; q <= max_dyadic_index(10); ++q) sum += dyadic_block(u, q);
  CHECK(max_diff(sum, u) < 1e-15);
  // B^0_2 is H by Parseval on each block
  CHECK(besov_norm(u, 0.0, 2.0) == doctest::Approx(h_norm(u)).epsilon(1e-12));
}

TEST_CASE("Besov norm of a single block scales with 2^{q sigma}") {
  const SpectralField e = SpectralField::real_mode(8, {3, 0});
  const int q = dyadic_index({3, 0});
  CHECK(besov_norm(e, -0.5, 4.0) == doctest::Approx(std::pow(2.0, -0.5 * q) * lp_norm(e, 4.0)).epsilon(1e-12));
}

TEST_CASE("truncate and resize") {
  const SpectralField u = sample(6, 5);
  const SpectralField t = truncate(u, 2);
  for_each_wavenumber(6, [&](Wavenumber k) {
    const bool kept = std::max(std::abs(k.k1), std::abs(k.k2)) <= 2;
    CHECK(t[k] == (kept ? u[k] : cplx{}));
  });
  const SpectralField big = resize(u, 9);
  CHECK(max_diff(resize(big, 6), u) == 0.0);
  CHECK(h_norm(big) == doctest::Approx(h_norm(u)));
}

TEST_CASE("cutoff mismatches are rejected") {
  SpectralField a(4), b(5);
  CHECK_THROWS_AS(a += b, DimensionError);
  CHECK_THROWS_AS(a.set({5, 0}, 1.0), DimensionError);
  CHECK_THROWS_AS(SpectralField(0), DimensionError);
}

TEST_CASE("inner product conventions") {
  const SpectralField u = sample(5, 6), v = sample(5, 7);
  CHECK(std::abs(inner(u, u).imag()) < 1e-15);
  CHECK(inner(u, u).real() == doctest::Approx(h_norm(u) * h_norm(u)));
  CHECK(real_inner(u, v) == doctest::Approx(inner(u, v).real()));
}

TEST_CASE("presets") {
  const SpectralField tg = taylor_green(6, 1.0);
  CHECK(tg.is_real());
  // |u|_{L2}^2 = amp^2 * 4 pi^2 / 2
  CHECK(h_norm(tg) == doctest::Approx(std::sqrt(2.0) * std::numbers::pi));
  CHECK(h_norm(shear_mix(8, 1.5)) == doctest::Approx(1.5));
  CHECK(h_norm(random_low(8, 9, 0.5)) == doctest::Approx(0.5));
  CHECK(random_low(8, 9) == random_low(8, 9));
  CHECK_THROWS(make_preset("nope", 8));
}
