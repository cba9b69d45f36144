#pragma once

// Initial-condition presets and random test fields.

#include <cstdint>
#include <string>

#include "nsldp/rng.hpp"
#include "nsldp/spectral.hpp"

namespace nsldp {

/// Real field with independent complex Gaussian coefficients on modes |k| <= max_wavenumber,
/// amplitude |k|^{-decay}. Draw order follows for_each_half_wavenumber.
SpectralField random_field(int cutoff, RngStream& rng, double max_wavenumber, double decay = 1.0);

/// Taylor-Green cell u = amplitude (sin x cos y, -cos x sin y).
SpectralField taylor_green(int cutoff, double amplitude = 1.0);
/// Fixed superposition of the modes (1,0), (1,1), (0,2), (2,1).
SpectralField shear_mix(int cutoff, double amplitude = 1.0);
/// Seeded random field on |k| <= 4, normalized to |u|_H = amplitude.
SpectralField random_low(int cutoff, std::uint64_t seed, double amplitude = 1.0);

/// Dispatch by name: taylor_green, shear_mix, random_low.
SpectralField make_preset(const std::string& name, int cutoff, std::uint64_t seed = 0, double amplitude = 1.0);

}  // namespace nsldp
