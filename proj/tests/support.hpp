#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bcitk/data.hpp"

namespace bcitk::testing {

using Rng = std::mt19937_64;

inline std::vector<double> normals(Rng& rng, std::size_t n, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

inline LabelAxis channel_names(std::size_t n) {
  LabelAxis out;
  for (std::size_t c = 0; c < n; ++c) out.push_back("ch" + std::to_string(c + 1));
  return out;
}

inline NumericAxis time_axis(std::size_t n, double fs_hz, double t0_ms = 0.0) {
  NumericAxis t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = t0_ms + static_cast<double>(i) * 1000.0 / fs_hz;
  return t;
}

/// Continuous white noise with extra {"fs"}.
inline Data noise_signal(Rng& rng, std::size_t n, std::size_t nc, double fs_hz) {
  return with_attribute(make_continuous(normals(rng, n * nc), time_axis(n, fs_hz), channel_names(nc)), "fs", fs_hz);
}

/// Rows [first, last) of continuous data; markers dropped, extra kept.
inline Data slice_rows(const Data& d, std::size_t first, std::size_t last) {
  const std::size_t nc = d.shape()[1];
  DataParts p = d.parts();
  p.shape[0] = last - first;
  p.values.assign(d.values().begin() + static_cast<std::ptrdiff_t>(first * nc),
                  d.values().begin() + static_cast<std::ptrdiff_t>(last * nc));
  const auto& t = d.numeric_axis(0);
  p.axes[0] = NumericAxis(t.begin() + static_cast<std::ptrdiff_t>(first), t.begin() + static_cast<std::ptrdiff_t>(last));
  p.markers.reset();
  return make_data(std::move(p));
}

/// Sorted random cut points splitting [0, n) into `parts` non-empty pieces.
inline std::vector<std::size_t> random_partition(Rng& rng, std::size_t n, std::size_t parts) {
  std::vector<std::size_t> all(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) all[i] = i + 1;
  std::shuffle(all.begin(), all.end(), rng);
  std::vector<std::size_t> cuts(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min(parts - 1, n - 1)));
  cuts.push_back(0);
  cuts.push_back(n);
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

/// (class, time, channel) epochs with the given labels and extra class_names.
inline Data make_epochs(std::vector<double> values, const LabelAxis& labels, std::size_t n_time, std::size_t nc,
                        double fs_hz, const std::vector<std::string>& class_names) {
  DataParts p{{labels.size(), n_time, nc},
              std::move(values),
              {labels, time_axis(n_time, fs_hz), channel_names(nc)},
              {std::string(kClass), std::string(kTime), std::string(kChannel)},
              {"#", "ms", "#"},
              Json{{"fs", fs_hz}, {"class_names", class_names}},
              std::nullopt};
  return make_data(std::move(p));
}

}  // namespace bcitk::testing
