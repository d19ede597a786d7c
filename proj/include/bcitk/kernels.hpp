#pragma once

// Data-parallel inner loops behind the toolkit operations.
//
// Each kernel exists twice: `serial::` is the plain reference kept for tests
// and benchmarks, `omp::` is the OpenMP version the operations call. For a
// given input both produce the same per-element arithmetic, so results agree
// bitwise (IIR, r2, TPS) or to FFT rounding (spectra).
//
// Buffers are row-major. A LaneLayout describes a block (outer, n_time, inner)
// whose "lanes" are the outer*inner 1-D series running along the middle axis.

#include <cstddef>
#include <span>

namespace bcitk::kernels {

struct LaneLayout {
  std::size_t outer = 1;
  std::size_t n_time = 0;
  std::size_t inner = 1;

  std::size_t lanes() const noexcept { return outer * inner; }
  std::size_t size() const noexcept { return outer * n_time * inner; }
};

/// Thin-plate-spline interpolant u(x,y) = sum_j w_j phi(|p - c_j|) + a0 + a1 x + a2 y,
/// phi(r) = r^2 log r.
struct TpsModel {
  std::span<const double> cx;
  std::span<const double> cy;
  std::span<const double> weights;
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
};

namespace serial {

/// Direct-form II transposed IIR along every lane. `b` and `a` have equal
/// length L with a[0] == 1; `state` holds L-1 delay values per lane
/// (lane-major, lane = o * inner + i) and is updated in place.
void iir_df2t(std::span<const double> b, std::span<const double> a, LaneLayout layout,
              std::span<const double> x, std::span<double> y, std::span<double> state);

/// Per-epoch centered channel covariance (denominator n_time - 1).
/// epochs: (n_epochs, n_time, n_channels); out: (n_epochs, n_channels, n_channels).
void epoch_covariances(std::span<const double> epochs, std::size_t n_epochs, std::size_t n_time,
                       std::size_t n_channels, std::span<double> out);

/// One-sided amplitude spectrum of each windowed lane.
/// out: (outer, n_time / 2 + 1, inner). Amplitudes are normalized by
/// 2 / sum(window), except DC and Nyquist which use 1 / sum(window).
void amplitude_spectra(std::span<const double> window, LaneLayout layout, std::span<const double> x,
                       std::span<double> out);

/// Signed r^2 per point. values: (n_obs, n_points); label[i] is 0 or 1 for the
/// two classes, anything else skips the observation. Points with zero pooled
/// variance get 0. Returns the number of such points.
std::size_t signed_r2(std::span<const double> values, std::span<const int> label, std::size_t n_points,
                      std::span<double> out);

/// Evaluates the interpolant on a resolution x resolution grid of cell centres
/// spanning [-1, 1]^2, row 0 at +y. Cells outside the unit disc become NaN.
void tps_grid(const TpsModel& model, std::size_t resolution, std::span<double> out);

}  // namespace serial

namespace omp {

void iir_df2t(std::span<const double> b, std::span<const double> a, LaneLayout layout,
              std::span<const double> x, std::span<double> y, std::span<double> state);
void epoch_covariances(std::span<const double> epochs, std::size_t n_epochs, std::size_t n_time,
                       std::size_t n_channels, std::span<double> out);
void amplitude_spectra(std::span<const double> window, LaneLayout layout, std::span<const double> x,
                       std::span<double> out);
std::size_t signed_r2(std::span<const double> values, std::span<const int> label, std::size_t n_points,
                      std::span<double> out);
void tps_grid(const TpsModel& model, std::size_t resolution, std::span<double> out);

}  // namespace omp

double tps_kernel(double r2) noexcept;

}  // namespace bcitk::kernels
