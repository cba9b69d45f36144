#pragma once

// The Navier-Stokes bilinear term b(u, v) = -P div(u (x) v), evaluated
// pseudo-spectrally. Products are formed on a grid padded so that no alias
// lands on a retained mode: the result equals the exact convolution restricted
// to the rule's effective lattice.

#include "nsldp/spectral.hpp"

namespace nsldp {

struct DealiasRule {
  enum class Kind { two_thirds, none };
  Kind kind = Kind::two_thirds;

  /// Modes with max(|k1|,|k2|) <= effective_cutoff take part in products and receive output.
  int effective_cutoff(int cutoff) const { return kind == Kind::two_thirds ? (2 * cutoff) / 3 : cutoff; }

  static DealiasRule two_thirds() { return {Kind::two_thirds}; }
  static DealiasRule none() { return {Kind::none}; }
};

/// Grid size used for products of fields with the given cutoff under `rule`.
int product_grid_size(int cutoff, DealiasRule rule);

/// u (x) v with components (u_i v_j), inputs and output restricted to the rule's lattice.
TensorField tensor_product(const SpectralField& u, const SpectralField& v, DealiasRule rule);

/// Component j of div T is i sum_l k_l T_lj.
VectorSpectrum divergence(const TensorField& t);

/// b(u, v) = -P div(u (x) v).
SpectralField b_bilinear(const SpectralField& u, const SpectralField& v, DealiasRule rule);
/// b(u) = b(u, u), using the symmetric product (three products instead of four).
SpectralField b_self(const SpectralField& u, DealiasRule rule);

/// Adjoint, in the real H pairing, of the linearization w -> b(u, w) + b(w, u),
/// applied to mu. Uses <b(u, w), mu> = -<b(u, mu), w> and
/// <b(w, u), mu> = -int w_j (d_j u_i) mu_i.
SpectralField b_linearized_adjoint(const SpectralField& u, const SpectralField& mu, DealiasRule rule);

}  // namespace nsldp
