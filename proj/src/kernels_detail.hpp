#pragma once

// Per-element arithmetic shared by the serial and OpenMP kernels. Keeping a
// single definition is what makes the two variants agree bitwise.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

#include "bcitk/kernels.hpp"

namespace bcitk::kernels::detail {

inline double df2t_step(const double* b, const double* a, std::size_t order, double* z, double xv) noexcept {
  if (order == 0) return b[0] * xv;
  const double yv = b[0] * xv + z[0];
  for (std::size_t k = 0; k + 1 < order; ++k) {
    z[k] = b[k + 1] * xv + z[k + 1] - a[k + 1] * yv;
  }
  z[order - 1] = b[order] * xv - a[order] * yv;
  return yv;
}

inline std::size_t lane_offset(const LaneLayout& l, std::size_t o, std::size_t t, std::size_t i) noexcept {
  return (o * l.n_time + t) * l.inner + i;
}

/// Returns true when the pooled variance was zero.
inline bool signed_r2_point(std::span<const double> values, std::span<const int> label, std::size_t n_points,
                            std::size_t p, double& out) noexcept {
  double n1 = 0.0, n2 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t e = 0; e < label.size(); ++e) {
    const double v = values[e * n_points + p];
    if (label[e] == 0) {
      n1 += 1.0;
      s1 += v;
    } else if (label[e] == 1) {
      n2 += 1.0;
      s2 += v;
    }
  }
  const double n = n1 + n2;
  const double mean_all = (s1 + s2) / n;
  double ss = 0.0;
  for (std::size_t e = 0; e < label.size(); ++e) {
    if (label[e] != 0 && label[e] != 1) continue;
    const double d = values[e * n_points + p] - mean_all;
    ss += d * d;
  }
  const double sigma = std::sqrt(ss / n);
  if (!(sigma > 0.0)) {
    out = 0.0;
    return true;
  }
  const double r = std::sqrt(n1 * n2) / n * ((s1 / n1 - s2 / n2) / sigma);
  const double r2 = std::min(r * r, 1.0);
  out = r < 0.0 ? -r2 : r2;
  return false;
}

inline double tps_eval(const TpsModel& m, double x, double y) noexcept {
  double u = m.a0 + m.a1 * x + m.a2 * y;
  for (std::size_t j = 0; j < m.weights.size(); ++j) {
    const double dx = x - m.cx[j];
    const double dy = y - m.cy[j];
    u += m.weights[j] * tps_kernel(dx * dx + dy * dy);
  }
  return u;
}

inline void grid_coords(std::size_t resolution, std::size_t row, std::size_t col, double& x, double& y) noexcept {
  const double step = 2.0 / static_cast<double>(resolution);
  x = -1.0 + (static_cast<double>(col) + 0.5) * step;
  y = 1.0 - (static_cast<double>(row) + 0.5) * step;
}

inline void covariance_one(const double* X, std::size_t n_time, std::size_t n_ch, double* C) {
  for (std::size_t i = 0; i < n_ch * n_ch; ++i) C[i] = 0.0;
  if (n_time < 2) return;
  // Means first, then the centred cross products in a fixed loop order.
  std::vector<double> mean(n_ch, 0.0);
  for (std::size_t t = 0; t < n_time; ++t)
    for (std::size_t c = 0; c < n_ch; ++c) mean[c] += X[t * n_ch + c];
  for (std::size_t c = 0; c < n_ch; ++c) mean[c] /= static_cast<double>(n_time);
  for (std::size_t t = 0; t < n_time; ++t) {
    const double* row = X + t * n_ch;
    for (std::size_t i = 0; i < n_ch; ++i) {
      const double di = row[i] - mean[i];
      double* Ci = C + i * n_ch;
      for (std::size_t j = i; j < n_ch; ++j) Ci[j] += di * (row[j] - mean[j]);
    }
  }
  const double denom = static_cast<double>(n_time - 1);
  for (std::size_t i = 0; i < n_ch; ++i) {
    for (std::size_t j = i; j < n_ch; ++j) {
      C[i * n_ch + j] /= denom;
      C[j * n_ch + i] = C[i * n_ch + j];
    }
  }
}

/// Real-to-complex FFTW plan usable from several threads via new-array execute.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    std::lock_guard lock(planner_mutex());
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  void execute(double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(plan_, in, reinterpret_cast<fftw_complex*>(out));
  }
  std::size_t size() const noexcept { return n_; }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  std::size_t n_;
  fftw_plan plan_ = nullptr;
};

inline void amplitude_lane(const RealFft& fft, std::span<const double> window, const LaneLayout& l,
                           std::span<const double> x, std::span<double> out, std::size_t o, std::size_t i,
                           double* buf, std::complex<double>* spec, double window_sum) {
  const std::size_t n = l.n_time;
  const std::size_t nf = n / 2 + 1;
  for (std::size_t t = 0; t < n; ++t) buf[t] = x[lane_offset(l, o, t, i)] * window[t];
  fft.execute(buf, spec);
  for (std::size_t k = 0; k < nf; ++k) {
    const bool single = (k == 0) || (n % 2 == 0 && k == n / 2);
    const double scale = (single ? 1.0 : 2.0) / window_sum;
    out[(o * nf + k) * l.inner + i] = std::abs(spec[k]) * scale;
  }
}

}  // namespace bcitk::kernels::detail
