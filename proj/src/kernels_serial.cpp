#include <vector>

#include "bcitk/kernels.hpp"
#include "kernels_detail.hpp"

namespace bcitk::kernels {

double tps_kernel(double r2) noexcept { return r2 > 0.0 ? 0.5 * r2 * std::log(r2) : 0.0; }

namespace serial {

void iir_df2t(std::span<const double> b, std::span<const double> a, LaneLayout layout, std::span<const double> x,
              std::span<double> y, std::span<double> state) {
  const std::size_t order = b.size() - 1;
  for (std::size_t o = 0; o < layout.outer; ++o) {
    for (std::size_t i = 0; i < layout.inner; ++i) {
      double* z = state.data() + (o * layout.inner + i) * order;
      for (std::size_t t = 0; t < layout.n_time; ++t) {
        const std::size_t idx = detail::lane_offset(layout, o, t, i);
        y[idx] = detail::df2t_step(b.data(), a.data(), order, z, x[idx]);
      }
    }
  }
}

void epoch_covariances(std::span<const double> epochs, std::size_t n_epochs, std::size_t n_time,
                       std::size_t n_channels, std::span<double> out) {
  for (std::size_t e = 0; e < n_epochs; ++e) {
    detail::covariance_one(epochs.data() + e * n_time * n_channels, n_time, n_channels,
                           out.data() + e * n_channels * n_channels);
  }
}

void amplitude_spectra(std::span<const double> window, LaneLayout layout, std::span<const double> x,
                       std::span<double> out) {
  const detail::RealFft fft(layout.n_time);
  double window_sum = 0.0;
  for (double w : window) window_sum += w;
  std::vector<double> buf(layout.n_time);
  std::vector<std::complex<double>> spec(layout.n_time / 2 + 1);
  for (std::size_t o = 0; o < layout.outer; ++o) {
    for (std::size_t i = 0; i < layout.inner; ++i) {
      detail::amplitude_lane(fft, window, layout, x, out, o, i, buf.data(), spec.data(), window_sum);
    }
  }
}

std::size_t signed_r2(std::span<const double> values, std::span<const int> label, std::size_t n_points,
                      std::span<double> out) {
  std::size_t zero_variance = 0;
  for (std::size_t p = 0; p < n_points; ++p) {
    if (detail::signed_r2_point(values, label, n_points, p, out[p])) ++zero_variance;
  }
  return zero_variance;
}

void tps_grid(const TpsModel& model, std::size_t resolution, std::span<double> out) {
  for (std::size_t r = 0; r < resolution; ++r) {
    for (std::size_t c = 0; c < resolution; ++c) {
      double x, y;
      detail::grid_coords(resolution, r, c, x, y);
      out[r * resolution + c] = (x * x + y * y <= 1.0) ? detail::tps_eval(model, x, y) : std::nan("");
    }
  }
}

}  // namespace serial
}  // namespace bcitk::kernels
