#include <filesystem>

#include "doctest.h"
#include "nsldp/io.hpp"
#include "nsldp/presets.hpp"

using namespace nsldp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "nsldp_test_io";
  fs::create_directories(d);
  return d / name;
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("field CSV and binary round trips are exact") {
  RngStream rng(40);
  const SpectralField u = random_field(6, rng, 1e9);
  CHECK(field_from_csv(field_to_csv(u)) == u);
  CHECK(field_from_binary(field_to_binary(u)) == u);
  write_field_csv(scratch("u.csv"), u);
  write_field_binary(scratch("u.nslf"), u);
  CHECK(read_field(scratch("u.csv")) == u);
  CHECK(read_field(scratch("u.nslf")) == u);
  CHECK(field_to_csv(u).rfind("# nsldp-field N=6", 0) == 0);
}

TEST_CASE("malformed inputs are rejected") {
  CHECK_THROWS(field_from_csv("k1,k2,re,im\n1,0,1,0\n"));
  CHECK_THROWS(field_from_binary("NSLF"));
  CHECK_THROWS(trajectory_from_binary("garbage"));
}

TEST_CASE("trajectory binary round trip") {
  IntegratorConfig cfg;
  cfg.dt = 0.05;
  const Trajectory tr = solve_skeleton(shear_mix(4, 1.0), ControlPath::zero(4, 0.05, 4), cfg);
  Trajectory t2 = trajectory_from_binary(trajectory_to_binary(tr));
  CHECK(t2.states == tr.states);
  CHECK(t2.dt == tr.dt);
  CHECK(t2.metadata.scheme == tr.metadata.scheme);
  write_trajectory_binary(scratch("t.nslt"), tr);
  CHECK(read_trajectory_binary(scratch("t.nslt")).states == tr.states);
}

TEST_CASE("atomic_write leaves no temporary file") {
  const fs::path p = scratch("sub/dir/out.txt");
  atomic_write(p, "one");
  atomic_write(p, "two");
  CHECK(read_file(p) == "two");
  for (const auto& e : fs::directory_iterator(p.parent_path())) CHECK(e.path().extension() != ".tmp");
}

TEST_CASE("diagnostics CSV") {
  IntegratorConfig cfg;
  cfg.dt = 0.05;
  cfg.record_diagnostics = true;
  const Trajectory tr = solve_skeleton(shear_mix(4, 1.0), ControlPath::zero(4, 0.05, 4), cfg);
  const std::string csv = diagnostics_to_csv(tr);
  CHECK(csv.rfind("t,h_norm,v_norm,l4_norm,energy_residual\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}
