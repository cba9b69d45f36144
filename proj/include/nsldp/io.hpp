#pragma once

// Serialization of fields and trajectories, diagnostics streams and atomic file
// writes.
//
// Field CSV: comment header "# nsldp-field N=<N> basis=<convention>", then a
// "k1,k2,re,im" header row and one record per nonzero lattice mode.
//
// Binary layouts are little-endian regardless of host:
//   field:      "NSLF" u32 version i32 N u64 count {i32 k1 i32 k2 f64 re f64 im}*count
//   trajectory: "NSLT" u32 version i32 N f64 dt f64 T f64 eps f64 delta u64 seed
//               u32 len char[len] scheme u32 states
//               per state: f64 t u64 count {i32 k1 i32 k2 f64 re f64 im}*count

#include <filesystem>
#include <string>

#include "nsldp/dynamics.hpp"
#include "nsldp/spectral.hpp"

namespace nsldp {

inline constexpr const char* kBasisConvention = "e_k=(i/2pi)(kperp/|k|)exp(ik.x),kperp=(k2,-k1)";

/// "%.17g"; round-trips every double.
std::string format_double(double x);

/// Write `content` to a temporary sibling and rename it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string field_to_csv(const SpectralField& u);
SpectralField field_from_csv(const std::string& text);
void write_field_csv(const std::filesystem::path& path, const SpectralField& u);
SpectralField read_field_csv(const std::filesystem::path& path);

std::string field_to_binary(const SpectralField& u);
SpectralField field_from_binary(const std::string& bytes);
void write_field_binary(const std::filesystem::path& path, const SpectralField& u);
SpectralField read_field_binary(const std::filesystem::path& path);

/// Reads either format, chosen by the leading magic bytes.
SpectralField read_field(const std::filesystem::path& path);

std::string trajectory_to_binary(const Trajectory& traj);
Trajectory trajectory_from_binary(const std::string& bytes);
void write_trajectory_binary(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory_binary(const std::filesystem::path& path);

/// "t,h_norm,v_norm,l4_norm,energy_residual" rows from the recorded diagnostics.
std::string diagnostics_to_csv(const Trajectory& traj);

std::string read_file(const std::filesystem::path& path);

}  // namespace nsldp
