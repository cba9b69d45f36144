#include "nsldp/nonlinearity.hpp"

#include "nsldp/errors.hpp"
#include "nsldp/transform.hpp"

namespace nsldp {

namespace {

void require_same_cutoff(const SpectralField& a, const SpectralField& b) {
  if (a.cutoff() != b.cutoff())
    throw DimensionError("cutoff mismatch: " + std::to_string(a.cutoff()) + " vs " +
                         std::to_string(b.cutoff()));
}

std::vector<cplx> pointwise(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

SpectralField minus_projected_divergence(const TensorField& t) {
  SpectralField out = leray_project(divergence(t));
  out *= -1.0;
  return out;
}

}  // namespace

int product_grid_size(int cutoff, DealiasRule rule) {
  // Inputs and output both live on |k_i| <= K: the product reaches 2K and an alias
  // at 2K - M must stay below -K.
  const int k = rule.effective_cutoff(cutoff);
  return even_grid_at_least(3 * k + 1);
}

TensorField tensor_product(const SpectralField& u, const SpectralField& v, DealiasRule rule) {
  require_same_cutoff(u, v);
  const int n = u.cutoff();
  const int keep = rule.effective_cutoff(n);
  auto& tr = GridTransform::cached(product_grid_size(n, rule));

  const VectorSpectrum uh = velocity(truncate(u, keep));
  const VectorSpectrum vh = velocity(truncate(v, keep));
  const std::vector<cplx> ug[2] = {tr.synthesize(uh.c1, n), tr.synthesize(uh.c2, n)};
  const std::vector<cplx> vg[2] = {tr.synthesize(vh.c1, n), tr.synthesize(vh.c2, n)};

  TensorField t(n);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const auto coeffs = tr.analyze(pointwise(ug[i], vg[j]), n, keep);
      std::copy(coeffs.begin(), coeffs.end(), t.mutable_component(i, j).begin());
    }
  return t;
}

VectorSpectrum divergence(const TensorField& t) {
  const int n = t.cutoff();
  VectorSpectrum d(n);
  const cplx iu(0.0, 1.0);
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2)
      for (int j = 0; j < 2; ++j)
        d.at(j, k1, k2) = iu * (double(k1) * t(0, j, k1, k2) + double(k2) * t(1, j, k1, k2));
  return d;
}

SpectralField b_bilinear(const SpectralField& u, const SpectralField& v, DealiasRule rule) {
  return minus_projected_divergence(tensor_product(u, v, rule));
}

SpectralField b_self(const SpectralField& u, DealiasRule rule) {
  const int n = u.cutoff();
  const int keep = rule.effective_cutoff(n);
  auto& tr = GridTransform::cached(product_grid_size(n, rule));

  const VectorSpectrum uh = velocity(truncate(u, keep));
  const auto g1 = tr.synthesize(uh.c1, n);
  const auto g2 = tr.synthesize(uh.c2, n);

  TensorField t(n);
  const auto t11 = tr.analyze(pointwise(g1, g1), n, keep);
  const auto t12 = tr.analyze(pointwise(g1, g2), n, keep);
  const auto t22 = tr.analyze(pointwise(g2, g2), n, keep);
  std::copy(t11.begin(), t11.end(), t.mutable_component(0, 0).begin());
  std::copy(t12.begin(), t12.end(), t.mutable_component(0, 1).begin());
  std::copy(t12.begin(), t12.end(), t.mutable_component(1, 0).begin());
  std::copy(t22.begin(), t22.end(), t.mutable_component(1, 1).begin());
  return minus_projected_divergence(t);
}

SpectralField b_linearized_adjoint(const SpectralField& u, const SpectralField& mu,
                                   DealiasRule rule) {
  require_same_cutoff(u, mu);
  const int n = u.cutoff();
  const int keep = rule.effective_cutoff(n);
  auto& tr = GridTransform::cached(product_grid_size(n, rule));

  SpectralField result = b_bilinear(u, mu, rule);
  result *= -1.0;

  const VectorSpectrum uh = velocity(truncate(u, keep));
  const VectorSpectrum mh = velocity(truncate(mu, keep));
  const std::vector<cplx> mg[2] = {tr.synthesize(mh.c1, n), tr.synthesize(mh.c2, n)};
  const cplx iu(0.0, 1.0);
  // grad[j][i] = d_j u_i on the grid.
  std::vector<cplx> grad[2][2];
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i)
      grad[j][i] = tr.synthesize_with(i == 0 ? uh.c1 : uh.c2, n,
                                      [&](int k1, int k2) { return iu * double(j == 0 ? k1 : k2); });

  VectorSpectrum m(n);
  for (int j = 0; j < 2; ++j) {
    std::vector<cplx> prod(mg[0].size());
    for (std::size_t x = 0; x < prod.size(); ++x)
      prod[x] = -(grad[j][0][x] * mg[0][x] + grad[j][1][x] * mg[1][x]);
    (j == 0 ? m.c1 : m.c2) = tr.analyze(prod, n, keep);
  }
  result += leray_project(m);
  return result;
}

}  // namespace nsldp
