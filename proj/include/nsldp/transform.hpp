#pragma once

// Uniform physical grids on D and the FFTW-backed maps between lattice
// coefficients and grid values. Plans are cached per thread; planning itself
// is serialized because the FFTW planner is not re-entrant.

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "nsldp/spectral.hpp"

namespace nsldp {

class GridTransform {
 public:
  explicit GridTransform(int grid_size);
  ~GridTransform();
  GridTransform(const GridTransform&) = delete;
  GridTransform& operator=(const GridTransform&) = delete;

  int size() const { return m_; }

  /// Values f(x_j) = sum_k c_k exp(i k.x_j) at x_j = 2 pi j / M for a lattice array
  /// of the given cutoff. Modes that alias onto the same bin are summed, so point
  /// values are exact for any cutoff.
  std::vector<cplx> synthesize(std::span<const cplx> lattice, int cutoff);
  /// Same, with a per-mode factor applied on the fly (e.g. i k_j for derivatives).
  template <class F>
  std::vector<cplx> synthesize_with(std::span<const cplx> lattice, int cutoff, F&& factor);

  /// Discrete Fourier coefficients (1/M^2) sum_j f(x_j) exp(-i k.x_j) for max|k_i| <= keep,
  /// written into a lattice array of the given cutoff (zero outside `keep`).
  std::vector<cplx> analyze(std::span<const cplx> values, int cutoff, int keep);

  /// Per-thread cached instance.
  static GridTransform& cached(int grid_size);

 private:
  void backward_in_place();
  void forward_in_place();

  int m_;
  cplx* buffer_;
  void* plan_forward_;
  void* plan_backward_;
};

template <class F>
std::vector<cplx> GridTransform::synthesize_with(std::span<const cplx> lattice, int cutoff,
                                                 F&& factor) {
  std::vector<cplx> tmp(lattice.begin(), lattice.end());
  for (int k1 = -cutoff; k1 <= cutoff; ++k1)
    for (int k2 = -cutoff; k2 <= cutoff; ++k2)
      tmp[lattice_index(cutoff, k1, k2)] *= factor(k1, k2);
  return synthesize(tmp, cutoff);
}

/// Smallest even grid size strictly larger than `minimum - 1`.
int even_grid_at_least(int minimum);

}  // namespace nsldp
