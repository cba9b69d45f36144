#include "nsldp/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "nsldp/errors.hpp"
#include "nsldp/transform.hpp"

namespace nsldp {

namespace {

void require_same_cutoff(const SpectralField& a, const SpectralField& b) {
  if (a.cutoff() != b.cutoff())
    throw DimensionError("cutoff mismatch: " + std::to_string(a.cutoff()) + " vs " +
                         std::to_string(b.cutoff()));
}

}  // namespace

SpectralField::SpectralField(int cutoff) : cutoff_(cutoff), coeffs_(lattice_size(cutoff)) {
  if (cutoff < 1) throw DimensionError("cutoff must be at least 1");
}

SpectralField SpectralField::mode(int cutoff, Wavenumber k, cplx c) {
  SpectralField u(cutoff);
  u.set(k, c);
  return u;
}

SpectralField SpectralField::real_mode(int cutoff, Wavenumber k, cplx c) {
  SpectralField u(cutoff);
  u.set_real(k, c);
  return u;
}

void SpectralField::set(Wavenumber k, cplx c) {
  if (k.is_zero()) throw DomainError("the zero mode is excluded from H");
  if (!in_lattice(cutoff_, k.k1, k.k2)) throw DimensionError("wavenumber outside lattice");
  coeffs_[lattice_index(cutoff_, k.k1, k.k2)] = c;
}

void SpectralField::set_real(Wavenumber k, cplx c) {
  set(k, c);
  set(-k, std::conj(c));
}

bool SpectralField::is_real(double rel_tol) const {
  const double scale = std::max(max_abs(), 1e-300);
  bool ok = true;
  for_each_wavenumber(cutoff_, [&](Wavenumber k) {
    if (std::abs((*this)[k] - std::conj((*this)[-k])) > rel_tol * scale) ok = false;
  });
  return ok;
}

double SpectralField::max_abs() const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_cutoff(*this, other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_same_cutoff(*this, other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(cplx a) {
  for (auto& c : coeffs_) c *= a;
  return *this;
}

SpectralField& SpectralField::operator*=(double a) {
  for (auto& c : coeffs_) c *= a;
  return *this;
}

SpectralField& SpectralField::axpy(double a, const SpectralField& x) {
  require_same_cutoff(*this, x);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += a * x.coeffs_[i];
  return *this;
}

// ---- TensorField ----

TensorField::TensorField(int cutoff) : cutoff_(cutoff) {
  if (cutoff < 1) throw DimensionError("cutoff must be at least 1");
  for (auto& c : comps_) c.assign(lattice_size(cutoff), cplx{});
}

double TensorField::sobolev_norm(double sigma) const {
  double sum = 0.0;
  for (int k1 = -cutoff_; k1 <= cutoff_; ++k1)
    for (int k2 = -cutoff_; k2 <= cutoff_; ++k2) {
      const double w = std::pow(1.0 + double(k1) * k1 + double(k2) * k2, sigma);
      const std::size_t idx = lattice_index(cutoff_, k1, k2);
      for (const auto& comp : comps_) sum += w * std::norm(comp[idx]);
    }
  // Coefficients are of exp(i k.x), whose L^2(D) norm is 2 pi.
  return kTwoPi * std::sqrt(sum);
}

bool TensorField::is_real(double rel_tol) const {
  double scale = 1e-300;
  for (const auto& comp : comps_)
    for (const auto& c : comp) scale = std::max(scale, std::abs(c));
  for (const auto& comp : comps_)
    for (int k1 = -cutoff_; k1 <= cutoff_; ++k1)
      for (int k2 = -cutoff_; k2 <= cutoff_; ++k2)
        if (std::abs(comp[lattice_index(cutoff_, k1, k2)] -
                     std::conj(comp[lattice_index(cutoff_, -k1, -k2)])) > rel_tol * scale)
          return false;
  return true;
}

TensorField& TensorField::operator-=(const TensorField& other) {
  if (other.cutoff_ != cutoff_) throw DimensionError("tensor cutoff mismatch");
  for (int s = 0; s < 4; ++s)
    for (std::size_t i = 0; i < comps_[s].size(); ++i) comps_[s][i] -= other.comps_[s][i];
  return *this;
}

// ---- Function-space maps ----

VectorSpectrum velocity(const SpectralField& u) {
  const int n = u.cutoff();
  VectorSpectrum v(n);
  for_each_wavenumber(n, [&](Wavenumber k) {
    const cplx s = u[k] * cplx(0.0, 1.0) / (kTwoPi * k.norm());
    v.at(0, k.k1, k.k2) = s * double(k.k2);
    v.at(1, k.k1, k.k2) = -s * double(k.k1);
  });
  return v;
}

SpectralField leray_project(const VectorSpectrum& v) {
  const int n = v.cutoff;
  if (v.c1.size() != lattice_size(n) || v.c2.size() != lattice_size(n))
    throw DimensionError("vector spectrum arrays do not match cutoff");
  SpectralField u(n);
  auto out = u.mutable_coefficients();
  for_each_wavenumber(n, [&](Wavenumber k) {
    const cplx perp_dot = double(k.k2) * v.at(0, k.k1, k.k2) - double(k.k1) * v.at(1, k.k1, k.k2);
    out[lattice_index(n, k.k1, k.k2)] = cplx(0.0, -kTwoPi / k.norm()) * perp_dot;
  });
  return u;
}

SpectralField leray_project(const VectorSpectrum& v, int expected_cutoff) {
  if (v.cutoff != expected_cutoff)
    throw DimensionError("vector spectrum cutoff " + std::to_string(v.cutoff) +
                         " does not match " + std::to_string(expected_cutoff));
  return leray_project(v);
}

SpectralField stokes_apply(const SpectralField& u) {
  return u.scaled([](Wavenumber k) { return -k.norm2(); });
}

SpectralField heat_semigroup(const SpectralField& u, double t, double alpha) {
  if (!(t >= 0.0)) throw DomainError("heat semigroup requires t >= 0");
  return u.scaled([&](Wavenumber k) { return std::exp(-t * (k.norm2() + alpha)); });
}

SpectralField fractional_power(const SpectralField& u, double r) {
  return u.scaled([&](Wavenumber k) { return std::pow(k.norm2(), r); });
}

SpectralField truncate(const SpectralField& u, int keep) {
  return u.scaled([&](Wavenumber k) {
    return (std::abs(k.k1) <= keep && std::abs(k.k2) <= keep) ? 1.0 : 0.0;
  });
}

SpectralField resize(const SpectralField& u, int cutoff) {
  SpectralField out(cutoff);
  const int common = std::min(cutoff, u.cutoff());
  for_each_wavenumber(common, [&](Wavenumber k) { out.set(k, u[k]); });
  return out;
}

cplx inner(const SpectralField& u, const SpectralField& v) {
  require_same_cutoff(u, v);
  cplx sum{};
  auto a = u.coefficients();
  auto b = v.coefficients();
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * std::conj(b[i]);
  return sum;
}

double real_inner(const SpectralField& u, const SpectralField& v) {
  require_same_cutoff(u, v);
  double sum = 0.0;
  auto a = u.coefficients();
  auto b = v.coefficients();
  for (std::size_t i = 0; i < a.size(); ++i)
    sum += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return sum;
}

double sobolev_norm(const SpectralField& u, double s) {
  double sum = 0.0;
  const int n = u.cutoff();
  auto c = u.coefficients();
  if (s == 0.0) {
    for (const auto& x : c) sum += std::norm(x);
  } else {
    for_each_wavenumber(n, [&](Wavenumber k) {
      sum += std::norm(c[lattice_index(n, k.k1, k.k2)]) * std::pow(k.norm2(), s);
    });
  }
  return std::sqrt(sum);
}

int quadrature_grid_size(int cutoff, int grid_factor) {
  if (grid_factor < 2) throw DomainError("grid_factor must be at least 2");
  return grid_factor * cutoff + 1;
}

double lp_norm(const SpectralField& u, double p, int grid_factor) {
  if (!(p >= 1.0)) throw DomainError("L^p norm requires p >= 1");
  const int m = quadrature_grid_size(u.cutoff(), grid_factor);
  auto& tr = GridTransform::cached(m);
  const VectorSpectrum v = velocity(u);
  const auto g1 = tr.synthesize(v.c1, v.cutoff);
  const auto g2 = tr.synthesize(v.c2, v.cutoff);
  double sum = 0.0;
  for (std::size_t j = 0; j < g1.size(); ++j) {
    const double mag2 = std::norm(g1[j]) + std::norm(g2[j]);
    sum += (p == 2.0) ? mag2 : std::pow(mag2, 0.5 * p);
  }
  const double cell = (kTwoPi / m) * (kTwoPi / m);
  return std::pow(cell * sum, 1.0 / p);
}

int dyadic_index(Wavenumber k) {
  const long n2 = long(k.k1) * k.k1 + long(k.k2) * k.k2;
  if (n2 == 0) throw DomainError("zero mode has no dyadic block");
  // Smallest q with |k|^2 <= 4^q; integer arithmetic keeps block edges exact.
  int q = 0;
  long bound = 1;
  while (n2 > bound) {
    bound *= 4;
    ++q;
  }
  return q;
}

int max_dyadic_index(int cutoff) { return dyadic_index({cutoff, cutoff}); }

SpectralField dyadic_block(const SpectralField& u, int q) {
  if (q < 0) throw DomainError("dyadic block index must be nonnegative");
  return u.scaled([&](Wavenumber k) { return dyadic_index(k) == q ? 1.0 : 0.0; });
}

double besov_norm(const SpectralField& u, double sigma, double p, int grid_factor) {
  if (!(p >= 1.0)) throw DomainError("Besov norm requires p >= 1");
  double sum = 0.0;
  for (int q = 0; q <= max_dyadic_index(u.cutoff()); ++q) {
    const SpectralField block = dyadic_block(u, q);
    if (block.max_abs() == 0.0) continue;
    const double lp = lp_norm(block, p, grid_factor);
    sum += std::pow(2.0, p * q * sigma) * std::pow(lp, p);
  }
  return std::pow(sum, 1.0 / p);
}

}  // namespace nsldp
