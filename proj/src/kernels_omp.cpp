#include <algorithm>
#include <vector>

#include <omp.h>

#include "bcitk/kernels.hpp"
#include "kernels_detail.hpp"

namespace bcitk::kernels::omp {

namespace {
// Channels processed together in the time-major IIR loop.
constexpr std::size_t kLaneBlock = 8;
}  // namespace

void iir_df2t(std::span<const double> b, std::span<const double> a, LaneLayout layout, std::span<const double> x,
              std::span<double> y, std::span<double> state) {
  const std::size_t order = b.size() - 1;
  const std::size_t blocks_per_outer = (layout.inner + kLaneBlock - 1) / kLaneBlock;
  const auto n_tasks = static_cast<std::ptrdiff_t>(layout.outer * blocks_per_outer);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t task = 0; task < n_tasks; ++task) {
    const std::size_t o = static_cast<std::size_t>(task) / blocks_per_outer;
    const std::size_t first = (static_cast<std::size_t>(task) % blocks_per_outer) * kLaneBlock;
    const std::size_t last = std::min(first + kLaneBlock, layout.inner);
    for (std::size_t t = 0; t < layout.n_time; ++t) {
      for (std::size_t i = first; i < last; ++i) {
        double* z = state.data() + (o * layout.inner + i) * order;
        const std::size_t idx = detail::lane_offset(layout, o, t, i);
        y[idx] = detail::df2t_step(b.data(), a.data(), order, z, x[idx]);
      }
    }
  }
}

void epoch_covariances(std::span<const double> epochs, std::size_t n_epochs, std::size_t n_time,
                       std::size_t n_channels, std::span<double> out) {
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t e = 0; e < static_cast<std::ptrdiff_t>(n_epochs); ++e) {
    const auto ue = static_cast<std::size_t>(e);
    detail::covariance_one(epochs.data() + ue * n_time * n_channels, n_time, n_channels,
                           out.data() + ue * n_channels * n_channels);
  }
}

void amplitude_spectra(std::span<const double> window, LaneLayout layout, std::span<const double> x,
                       std::span<double> out) {
  const detail::RealFft fft(layout.n_time);
  double window_sum = 0.0;
  for (double w : window) window_sum += w;
  const auto n_lanes = static_cast<std::ptrdiff_t>(layout.lanes());

#pragma omp parallel
  {
    std::vector<double> buf(layout.n_time);
    std::vector<std::complex<double>> spec(layout.n_time / 2 + 1);
#pragma omp for schedule(static)
    for (std::ptrdiff_t lane = 0; lane < n_lanes; ++lane) {
      const std::size_t o = static_cast<std::size_t>(lane) / layout.inner;
      const std::size_t i = static_cast<std::size_t>(lane) % layout.inner;
      detail::amplitude_lane(fft, window, layout, x, out, o, i, buf.data(), spec.data(), window_sum);
    }
  }
}

std::size_t signed_r2(std::span<const double> values, std::span<const int> label, std::size_t n_points,
                      std::span<double> out) {
  std::size_t zero_variance = 0;
#pragma omp parallel for schedule(static) reduction(+ : zero_variance)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(n_points); ++p) {
    if (detail::signed_r2_point(values, label, n_points, static_cast<std::size_t>(p),
                                out[static_cast<std::size_t>(p)])) {
      ++zero_variance;
    }
  }
  return zero_variance;
}

void tps_grid(const TpsModel& model, std::size_t resolution, std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(resolution); ++r) {
    const auto ur = static_cast<std::size_t>(r);
    for (std::size_t c = 0; c < resolution; ++c) {
      double x, y;
      detail::grid_coords(resolution, ur, c, x, y);
      out[ur * resolution + c] = (x * x + y * y <= 1.0) ? detail::tps_eval(model, x, y) : std::nan("");
    }
  }
}

}  // namespace bcitk::kernels::omp
