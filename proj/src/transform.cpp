#include "nsldp/transform.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>

#include "nsldp/errors.hpp"

namespace nsldp {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

inline int wrap(int k, int m) {
  int r = k % m;
  return r < 0 ? r + m : r;
}

}  // namespace

GridTransform::GridTransform(int grid_size) : m_(grid_size) {
  if (grid_size < 1) throw DimensionError("grid size must be positive");
  std::lock_guard lock(planner_mutex());
  buffer_ = reinterpret_cast<cplx*>(fftw_alloc_complex(std::size_t(m_) * m_));
  auto* buf = reinterpret_cast<fftw_complex*>(buffer_);
  plan_forward_ = fftw_plan_dft_2d(m_, m_, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_backward_ = fftw_plan_dft_2d(m_, m_, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

GridTransform::~GridTransform() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_backward_));
  fftw_free(buffer_);
}

void GridTransform::backward_in_place() { fftw_execute(static_cast<fftw_plan>(plan_backward_)); }
void GridTransform::forward_in_place() { fftw_execute(static_cast<fftw_plan>(plan_forward_)); }

std::vector<cplx> GridTransform::synthesize(std::span<const cplx> lattice, int cutoff) {
  if (lattice.size() != lattice_size(cutoff)) throw DimensionError("lattice array size mismatch");
  std::fill(buffer_, buffer_ + std::size_t(m_) * m_, cplx{});
  for (int k1 = -cutoff; k1 <= cutoff; ++k1) {
    const std::size_t row = std::size_t(wrap(k1, m_)) * m_;
    for (int k2 = -cutoff; k2 <= cutoff; ++k2)
      buffer_[row + wrap(k2, m_)] += lattice[lattice_index(cutoff, k1, k2)];
  }
  backward_in_place();
  return {buffer_, buffer_ + std::size_t(m_) * m_};
}

std::vector<cplx> GridTransform::analyze(std::span<const cplx> values, int cutoff, int keep) {
  if (values.size() != std::size_t(m_) * m_) throw DimensionError("grid array size mismatch");
  if (keep > cutoff) keep = cutoff;
  if (2 * keep >= m_) throw DimensionError("grid too coarse to resolve requested modes");
  std::copy(values.begin(), values.end(), buffer_);
  forward_in_place();
  const double scale = 1.0 / (double(m_) * m_);
  std::vector<cplx> out(lattice_size(cutoff));
  for (int k1 = -keep; k1 <= keep; ++k1) {
    const std::size_t row = std::size_t(wrap(k1, m_)) * m_;
    for (int k2 = -keep; k2 <= keep; ++k2)
      out[lattice_index(cutoff, k1, k2)] = buffer_[row + wrap(k2, m_)] * scale;
  }
  return out;
}

GridTransform& GridTransform::cached(int grid_size) {
  thread_local std::map<int, std::unique_ptr<GridTransform>> cache;
  auto& slot = cache[grid_size];
  if (!slot) slot = std::make_unique<GridTransform>(grid_size);
  return *slot;
}

int even_grid_at_least(int minimum) { return minimum % 2 == 0 ? minimum : minimum + 1; }

}  // namespace nsldp
