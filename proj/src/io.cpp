#include "nsldp/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "nsldp/errors.hpp"

namespace nsldp {

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kFieldVersion = 1;
constexpr std::uint32_t kTrajectoryVersion = 1;

template <class T>
void put(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(bytes, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : data_(bytes) {}

  template <class T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) throw std::runtime_error("truncated binary record");
    char bytes[sizeof(T)];
    std::memcpy(bytes, data_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }

  std::string take(std::size_t n) {
    if (pos_ + n > data_.size()) throw std::runtime_error("truncated binary record");
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

void put_modes(std::string& out, const SpectralField& u) {
  put<std::uint64_t>(out, lattice_size(u.cutoff()) - 1);
  for_each_wavenumber(u.cutoff(), [&](Wavenumber k) {
    const cplx c = u[k];
    put<std::int32_t>(out, k.k1);
    put<std::int32_t>(out, k.k2);
    put<double>(out, c.real());
    put<double>(out, c.imag());
  });
}

SpectralField get_modes(Reader& in, int cutoff) {
  SpectralField u(cutoff);
  const auto count = in.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    const int k1 = in.get<std::int32_t>();
    const int k2 = in.get<std::int32_t>();
    const double re = in.get<double>();
    const double im = in.get<double>();
    u.set({k1, k2}, {re, im});
  }
  return u;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), std::streamsize(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string field_to_csv(const SpectralField& u) {
  std::string out = "# nsldp-field N=" + std::to_string(u.cutoff()) + " basis=" + kBasisConvention + "\n";
  out += "k1,k2,re,im\n";
  for_each_wavenumber(u.cutoff(), [&](Wavenumber k) {
    const cplx c = u[k];
    out += std::to_string(k.k1) + "," + std::to_string(k.k2) + "," + format_double(c.real()) + "," +
           format_double(c.imag()) + "\n";
  });
  return out;
}

SpectralField field_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int cutoff = -1;
  SpectralField u;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("N=");
      if (pos != std::string::npos) {
        cutoff = std::stoi(line.substr(pos + 2));
        u = SpectralField(cutoff);
      }
      continue;
    }
    if (line.rfind("k1", 0) == 0) continue;
    if (cutoff < 0) throw std::runtime_error("field CSV lacks the N= header");
    int k1, k2;
    double re, im;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &k1, &k2, &re, &im) != 4)
      throw std::runtime_error("malformed field CSV row: " + line);
    u.set({k1, k2}, {re, im});
  }
  if (cutoff < 0) throw std::runtime_error("field CSV lacks the N= header");
  return u;
}

void write_field_csv(const fs::path& path, const SpectralField& u) { atomic_write(path, field_to_csv(u)); }
SpectralField read_field_csv(const fs::path& path) { return field_from_csv(read_file(path)); }

std::string field_to_binary(const SpectralField& u) {
  std::string out = "NSLF";
  put<std::uint32_t>(out, kFieldVersion);
  put<std::int32_t>(out, u.cutoff());
  put_modes(out, u);
  return out;
}

SpectralField field_from_binary(const std::string& bytes) {
  Reader in(bytes);
  if (in.take(4) != "NSLF") throw std::runtime_error("not a field file (bad magic)");
  if (in.get<std::uint32_t>() != kFieldVersion) throw std::runtime_error("unsupported field version");
  const int cutoff = in.get<std::int32_t>();
  SpectralField u = get_modes(in, cutoff);
  if (!in.done()) throw std::runtime_error("trailing bytes in field file");
  return u;
}

void write_field_binary(const fs::path& path, const SpectralField& u) { atomic_write(path, field_to_binary(u)); }
SpectralField read_field_binary(const fs::path& path) { return field_from_binary(read_file(path)); }

SpectralField read_field(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.rfind("NSLF", 0) == 0) return field_from_binary(bytes);
  return field_from_csv(bytes);
}

std::string trajectory_to_binary(const Trajectory& traj) {
  std::string out = "NSLT";
  put<std::uint32_t>(out, kTrajectoryVersion);
  put<std::int32_t>(out, traj.cutoff());
  put<double>(out, traj.dt);
  put<double>(out, traj.horizon());
  put<double>(out, traj.metadata.epsilon);
  put<double>(out, traj.metadata.delta);
  put<std::uint64_t>(out, traj.metadata.seed);
  put<std::uint32_t>(out, std::uint32_t(traj.metadata.scheme.size()));
  out += traj.metadata.scheme;
  put<std::uint32_t>(out, std::uint32_t(traj.states.size()));
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    put<double>(out, double(n) * traj.dt);
    put_modes(out, traj.states[n]);
  }
  return out;
}

Trajectory trajectory_from_binary(const std::string& bytes) {
  Reader in(bytes);
  if (in.take(4) != "NSLT") throw std::runtime_error("not a trajectory file (bad magic)");
  if (in.get<std::uint32_t>() != kTrajectoryVersion) throw std::runtime_error("unsupported trajectory version");
  Trajectory traj;
  const int cutoff = in.get<std::int32_t>();
  traj.dt = in.get<double>();
  in.get<double>();
  traj.metadata.epsilon = in.get<double>();
  traj.metadata.delta = in.get<double>();
  traj.metadata.seed = in.get<std::uint64_t>();
  traj.metadata.scheme = in.take(in.get<std::uint32_t>());
  const auto count = in.get<std::uint32_t>();
  traj.states.reserve(count);
  for (std::uint32_t n = 0; n < count; ++n) {
    in.get<double>();
    traj.states.push_back(get_modes(in, cutoff));
  }
  if (!in.done()) throw std::runtime_error("trailing bytes in trajectory file");
  return traj;
}

void write_trajectory_binary(const fs::path& path, const Trajectory& traj) {
  atomic_write(path, trajectory_to_binary(traj));
}
Trajectory read_trajectory_binary(const fs::path& path) { return trajectory_from_binary(read_file(path)); }

std::string diagnostics_to_csv(const Trajectory& traj) {
  std::string out = "t,h_norm,v_norm,l4_norm,energy_residual\n";
  for (const auto& r : traj.diagnostics)
    out += format_double(r.t) + "," + format_double(r.h_norm) + "," + format_double(r.v_norm) + "," +
           format_double(r.l4_norm) + "," + format_double(r.energy_residual) + "\n";
  return out;
}

}  // namespace nsldp
