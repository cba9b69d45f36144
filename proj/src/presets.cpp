#include "nsldp/presets.hpp"

#include <cmath>

#include "nsldp/errors.hpp"

namespace nsldp {

SpectralField random_field(int cutoff, RngStream& rng, double max_wavenumber, double decay) {
  SpectralField u(cutoff);
  for_each_half_wavenumber(cutoff, [&](Wavenumber k) {
    const double re = rng.normal();
    const double im = rng.normal();
    if (k.norm() > max_wavenumber) return;
    const double a = std::pow(k.norm(), -decay) / std::sqrt(2.0);
    u.set_real(k, {a * re, a * im});
  });
  return u;
}

SpectralField taylor_green(int cutoff, double amplitude) {
  if (cutoff < 1) throw DimensionError("cutoff must be at least 1");
  VectorSpectrum v(cutoff);
  const cplx q = amplitude / cplx(0.0, 4.0);
  for (int s1 : {-1, 1})
    for (int s2 : {-1, 1}) {
      v.at(0, s1, s2) = double(s1) * q;
      v.at(1, s1, s2) = -double(s2) * q;
    }
  return leray_project(v, cutoff);
}

SpectralField shear_mix(int cutoff, double amplitude) {
  if (cutoff < 2) throw DimensionError("shear_mix needs cutoff >= 2");
  SpectralField u(cutoff);
  u.set_real({1, 0}, {1.0, 0.0});
  u.set_real({1, 1}, {0.5, -0.3});
  u.set_real({0, 2}, {0.0, 0.4});
  u.set_real({2, 1}, {-0.25, 0.2});
  u *= amplitude / h_norm(u);
  return u;
}

SpectralField random_low(int cutoff, std::uint64_t seed, double amplitude) {
  RngStream rng(seed, 0x1c);
  SpectralField u = random_field(cutoff, rng, 4.0, 1.0);
  u *= amplitude / h_norm(u);
  return u;
}

SpectralField make_preset(const std::string& name, int cutoff, std::uint64_t seed, double amplitude) {
  if (name == "taylor_green") return taylor_green(cutoff, amplitude);
  if (name == "shear_mix") return shear_mix(cutoff, amplitude);
  if (name == "random_low") return random_low(cutoff, seed, amplitude);
  throw DomainError("unknown initial-condition preset '" + name + "'");
}

}  // namespace nsldp
