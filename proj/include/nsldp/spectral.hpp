#pragma once

// Fourier-side representation of divergence-free, zero-mean velocity fields on the
// periodic square D = [0, 2pi]^2 and the diagonal operators acting on them.
//
// Basis convention: e_k(x) = (i / 2pi) (k_perp / |k|) exp(i k.x), k_perp = (k2, -k1).
// The factor i makes real fields Hermitian-symmetric in their coefficients,
// c(-k) = conj(c(k)). {e_k} is orthonormal in H, so |u|_H^2 = sum |c_k|^2.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace nsldp {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Wavenumber {
  int k1 = 0;
  int k2 = 0;

  double norm2() const { return double(k1) * k1 + double(k2) * k2; }
  double norm() const { return std::sqrt(norm2()); }
  Wavenumber operator-() const { return {-k1, -k2}; }
  bool is_zero() const { return k1 == 0 && k2 == 0; }
  friend bool operator==(const Wavenumber&, const Wavenumber&) = default;
};

// Square Galerkin lattice {max(|k1|,|k2|) <= N}, stored densely, k1 major.
inline int lattice_side(int cutoff) { return 2 * cutoff + 1; }
inline std::size_t lattice_size(int cutoff) {
  return std::size_t(lattice_side(cutoff)) * std::size_t(lattice_side(cutoff));
}
inline std::size_t lattice_index(int cutoff, int k1, int k2) {
  return std::size_t(k1 + cutoff) * std::size_t(lattice_side(cutoff)) + std::size_t(k2 + cutoff);
}
inline bool in_lattice(int cutoff, int k1, int k2) {
  return std::abs(k1) <= cutoff && std::abs(k2) <= cutoff;
}
/// Representative half of Z^2 \ {0}: the conjugate half is -k of these.
inline bool in_half_lattice(int k1, int k2) { return k2 > 0 || (k2 == 0 && k1 > 0); }

/// Visit every nonzero mode of the lattice in storage order.
template <class F>
void for_each_wavenumber(int cutoff, F&& f) {
  for (int k1 = -cutoff; k1 <= cutoff; ++k1)
    for (int k2 = -cutoff; k2 <= cutoff; ++k2)
      if (k1 != 0 || k2 != 0) f(Wavenumber{k1, k2});
}

/// Visit the half lattice in a fixed order; random samplers depend on this order.
template <class F>
void for_each_half_wavenumber(int cutoff, F&& f) {
  for (int k2 = 0; k2 <= cutoff; ++k2)
    for (int k1 = -cutoff; k1 <= cutoff; ++k1)
      if (in_half_lattice(k1, k2)) f(Wavenumber{k1, k2});
}

class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(int cutoff);

  /// The single complex mode c * e_k (not a real field unless paired with -k).
  static SpectralField mode(int cutoff, Wavenumber k, cplx c = 1.0);
  /// c e_k + conj(c) e_{-k}: the real field built from one wavevector.
  static SpectralField real_mode(int cutoff, Wavenumber k, cplx c = 1.0);

  int cutoff() const { return cutoff_; }
  bool empty() const { return coeffs_.empty(); }

  /// Coefficient <u, e_k>_H; zero for k = 0 and outside the lattice.
  cplx operator()(int k1, int k2) const {
    return in_lattice(cutoff_, k1, k2) ? coeffs_[lattice_index(cutoff_, k1, k2)] : cplx{};
  }
  cplx operator[](Wavenumber k) const { return (*this)(k.k1, k.k2); }

  void set(Wavenumber k, cplx c);
  /// Sets k and mirrors conj(c) onto -k.
  void set_real(Wavenumber k, cplx c);

  std::span<const cplx> coefficients() const { return coeffs_; }
  /// Raw access; the k = 0 slot must stay zero.
  std::span<cplx> mutable_coefficients() { return coeffs_; }

  bool is_real(double rel_tol = 1e-13) const;
  /// Largest coefficient modulus.
  double max_abs() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(cplx a);
  SpectralField& operator*=(double a);
  /// this += a * x
  SpectralField& axpy(double a, const SpectralField& x);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator*(cplx s, SpectralField a) { return a *= s; }
  friend bool operator==(const SpectralField&, const SpectralField&) = default;

  /// Apply a real per-mode multiplier m(k).
  template <class M>
  SpectralField scaled(M&& multiplier) const {
    SpectralField out(*this);
    for_each_wavenumber(cutoff_, [&](Wavenumber k) {
      out.coeffs_[lattice_index(cutoff_, k.k1, k.k2)] *= multiplier(k);
    });
    return out;
  }

 private:
  int cutoff_ = 0;
  std::vector<cplx> coeffs_;
};

/// Full two-component Fourier array, u(x) = sum_k uhat(k) exp(i k.x), including k = 0.
struct VectorSpectrum {
  int cutoff = 0;
  std::vector<cplx> c1;
  std::vector<cplx> c2;

  VectorSpectrum() = default;
  explicit VectorSpectrum(int n) : cutoff(n), c1(lattice_size(n)), c2(lattice_size(n)) {}
  cplx& at(int comp, int k1, int k2) { return (comp == 0 ? c1 : c2)[lattice_index(cutoff, k1, k2)]; }
  cplx at(int comp, int k1, int k2) const {
    return (comp == 0 ? c1 : c2)[lattice_index(cutoff, k1, k2)];
  }
};

/// 2x2 matrix field on the full Fourier lattice (components 11, 12, 21, 22).
class TensorField {
 public:
  TensorField() = default;
  explicit TensorField(int cutoff);

  int cutoff() const { return cutoff_; }
  cplx operator()(int i, int j, int k1, int k2) const {
    return in_lattice(cutoff_, k1, k2) ? comps_[slot(i, j)][lattice_index(cutoff_, k1, k2)] : cplx{};
  }
  cplx& at(int i, int j, int k1, int k2) { return comps_[slot(i, j)][lattice_index(cutoff_, k1, k2)]; }
  std::span<const cplx> component(int i, int j) const { return comps_[slot(i, j)]; }
  std::span<cplx> mutable_component(int i, int j) { return comps_[slot(i, j)]; }

  /// [H^sigma]^4 norm with Bessel weight (1+|k|^2)^sigma, so the k = 0 mode counts with weight 1.
  double sobolev_norm(double sigma) const;
  bool is_real(double rel_tol = 1e-13) const;

  TensorField& operator-=(const TensorField& other);

 private:
  static int slot(int i, int j) { return 2 * i + j; }
  int cutoff_ = 0;
  std::array<std::vector<cplx>, 4> comps_;
};

// ---- Function-space maps ----

/// Full vector coefficients uhat(k) = c_k i k_perp / (2 pi |k|).
VectorSpectrum velocity(const SpectralField& u);
/// Leray-Helmholtz projection of a vector spectrum onto span{e_k}; k = 0 is dropped.
SpectralField leray_project(const VectorSpectrum& v);
/// As above, but the input must live on `expected_cutoff`.
SpectralField leray_project(const VectorSpectrum& v, int expected_cutoff);

/// A e_k = -|k|^2 e_k.
SpectralField stokes_apply(const SpectralField& u);
/// exp(t (A - alpha)); t must be nonnegative.
SpectralField heat_semigroup(const SpectralField& u, double t, double alpha = 0.0);
/// (-A)^r e_k = |k|^{2r} e_k.
SpectralField fractional_power(const SpectralField& u, double r);
/// P_K: keep modes with max(|k1|,|k2|) <= K, same storage cutoff.
SpectralField truncate(const SpectralField& u, int keep);
/// Re-embed on a lattice of different cutoff (drops modes that do not fit).
SpectralField resize(const SpectralField& u, int cutoff);

/// <u, v>_H = sum_k c_k conj(d_k).
cplx inner(const SpectralField& u, const SpectralField& v);
/// Real part of the H inner product; the natural pairing for real fields.
double real_inner(const SpectralField& u, const SpectralField& v);
/// (sum_k |c_k|^2 |k|^{2s})^{1/2}.
double sobolev_norm(const SpectralField& u, double s);
inline double h_norm(const SpectralField& u) { return sobolev_norm(u, 0.0); }
inline double v_norm(const SpectralField& u) { return sobolev_norm(u, 1.0); }

/// Physical grid size used for quadrature: grid_factor * N + 1 points per side.
int quadrature_grid_size(int cutoff, int grid_factor);
/// L^p(D) norm of the Euclidean magnitude of the reconstructed velocity.
double lp_norm(const SpectralField& u, double p, int grid_factor = 2);

/// Dyadic block index of a mode: the q >= 0 with 2^{q-1} < |k| <= 2^q (|k| = 1 gives q = 0).
int dyadic_index(Wavenumber k);
/// Largest block index populated on a cutoff-N lattice.
int max_dyadic_index(int cutoff);
/// delta_q u: modes with 2^{q-1} < |k| <= 2^q.
SpectralField dyadic_block(const SpectralField& u, int q);
/// (sum_q 2^{p q sigma} |delta_q u|_{L^p}^p)^{1/p}.
double besov_norm(const SpectralField& u, double sigma, double p, int grid_factor = 2);

}  // namespace nsldp
