#include "bcitk/sigproc.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "bcitk/error.hpp"
#include "bcitk/kernels.hpp"

namespace bcitk {

namespace {

using cd = std::complex<double>;

kernels::LaneLayout lanes_along(const Data& data, std::size_t dim) {
  kernels::LaneLayout l;
  for (std::size_t d = 0; d < dim; ++d) l.outer *= data.shape()[d];
  l.n_time = data.shape()[dim];
  for (std::size_t d = dim + 1; d < data.rank(); ++d) l.inner *= data.shape()[d];
  return l;
}

// Gathers the listed positions along one dimension.
std::vector<double> take_along(const Data& data, std::size_t dim, std::span<const std::size_t> idx) {
  const auto l = lanes_along(data, dim);
  const auto vals = data.values();
  std::vector<double> out(l.outer * idx.size() * l.inner);
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto src = vals.begin() + static_cast<std::ptrdiff_t>((o * l.n_time + idx[k]) * l.inner);
      std::copy_n(src, l.inner, out.begin() + static_cast<std::ptrdiff_t>((o * idx.size() + k) * l.inner));
    }
  }
  return out;
}

std::vector<cd> poly_from_roots(const std::vector<cd>& roots) {
  std::vector<cd> p{cd(1.0, 0.0)};
  for (const cd& r : roots) {
    std::vector<cd> next(p.size() + 1, cd(0.0, 0.0));
    for (std::size_t i = 0; i < p.size(); ++i) {
      next[i] += p[i];
      next[i + 1] -= r * p[i];
    }
    p = std::move(next);
  }
  return p;
}

// b and a padded to a common length.
std::pair<std::vector<double>, std::vector<double>> padded(const IirCoefficients& c) {
  const std::size_t n = std::max(c.b.size(), c.a.size());
  std::vector<double> b(c.b), a(c.a);
  b.resize(n, 0.0);
  a.resize(n, 0.0);
  return {std::move(b), std::move(a)};
}

void check_coefficients(const IirCoefficients& c) {
  if (c.b.empty() || c.a.empty()) fail(Errc::InvalidArgument, "empty filter coefficients");
  if (c.a[0] != 1.0) fail(Errc::InvalidArgument, "a[0] must be 1; use make_coefficients to normalise");
}

std::vector<double> reversed_time(const std::vector<double>& x, const kernels::LaneLayout& l) {
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t t = 0; t < l.n_time; ++t) {
      const auto src = x.begin() + static_cast<std::ptrdiff_t>((o * l.n_time + t) * l.inner);
      std::copy_n(src, l.inner,
                  out.begin() + static_cast<std::ptrdiff_t>((o * l.n_time + (l.n_time - 1 - t)) * l.inner));
    }
  }
  return out;
}

std::vector<double> scaled_state(const std::vector<double>& zi, const std::vector<double>& x,
                                 const kernels::LaneLayout& l) {
  std::vector<double> z(l.lanes() * zi.size());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t i = 0; i < l.inner; ++i) {
      const double x0 = x[(o * l.n_time) * l.inner + i];
      double* lane = z.data() + (o * l.inner + i) * zi.size();
      for (std::size_t k = 0; k < zi.size(); ++k) lane[k] = zi[k] * x0;
    }
  }
  return z;
}

}  // namespace

Data select_channels(const Data& data, std::span<const std::string> patterns, bool invert) {
  const std::size_t dim = axis_index(data, kChannel);
  const auto& channels = data.label_axis(dim);
  std::vector<std::size_t> keep;
  LabelAxis names;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const bool match = std::any_of(patterns.begin(), patterns.end(), [&](const std::string& p) {
      return fnmatch(p.c_str(), channels[c].c_str(), 0) == 0;
    });
    if (match != invert) {
      keep.push_back(c);
      names.push_back(channels[c]);
    }
  }
  if (keep.empty()) fail(Errc::NoChannelsLeft, "channel selection removed every channel");
  Shape shape = data.shape();
  shape[dim] = keep.size();
  return with_replaced(data, std::move(shape), take_along(data, dim, keep), {{dim, std::move(names), {}, {}}});
}

IirCoefficients design_bandpass(double low_hz, double high_hz, double fs_hz, int order) {
  if (!(fs_hz > 0.0) || !(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < fs_hz / 2.0) || order < 1) {
    fail(Errc::InvalidBand, "need 0 < low < high < fs/2 and order >= 1 (got " + std::to_string(low_hz) + ", " +
                                std::to_string(high_hz) + ", fs " + std::to_string(fs_hz) + ", order " +
                                std::to_string(order) + ")");
  }
  const auto n = static_cast<std::size_t>(order);
  const double pi = std::numbers::pi;

  // Analog low-pass prototype, unit cutoff.
  std::vector<cd> proto;
  for (int m = -order + 1; m < order; m += 2) {
    proto.push_back(-std::exp(cd(0.0, pi * m / (2.0 * order))));
  }

  // Pre-warped band edges and low-pass -> band-pass transform.
  const double fs2 = 2.0 * fs_hz;
  const double w1 = fs2 * std::tan(pi * low_hz / fs_hz);
  const double w2 = fs2 * std::tan(pi * high_hz / fs_hz);
  const double bw = w2 - w1;
  const double w0 = std::sqrt(w1 * w2);
  std::vector<cd> poles;
  for (const cd& p : proto) {
    const cd half = p * bw / 2.0;
    const cd root = std::sqrt(half * half - w0 * w0);
    poles.push_back(half + root);
    poles.push_back(half - root);
  }
  const double gain_analog = std::pow(bw, static_cast<double>(n));

  // Bilinear transform: n zeros at s = 0 map to z = 1, the n zeros at
  // infinity map to z = -1.
  std::vector<cd> zd(n, cd(1.0, 0.0));
  zd.insert(zd.end(), n, cd(-1.0, 0.0));
  std::vector<cd> pd;
  cd denom(1.0, 0.0);
  for (const cd& p : poles) {
    pd.push_back((fs2 + p) / (fs2 - p));
    denom *= (fs2 - p);
  }
  const double gain = gain_analog * (std::pow(fs2, static_cast<double>(n)) / denom).real();

  const auto bz = poly_from_roots(zd);
  const auto az = poly_from_roots(pd);
  IirCoefficients c;
  c.b.resize(bz.size());
  c.a.resize(az.size());
  for (std::size_t i = 0; i < bz.size(); ++i) c.b[i] = gain * bz[i].real();
  for (std::size_t i = 0; i < az.size(); ++i) c.a[i] = az[i].real();
  c.a[0] = 1.0;
  c.band = {low_hz, high_hz};
  c.order = order;
  c.fs_hz = fs_hz;
  return c;
}

IirCoefficients make_coefficients(std::vector<double> b, std::vector<double> a) {
  if (b.empty() || a.empty() || a[0] == 0.0) fail(Errc::InvalidArgument, "need non-empty b, a with a[0] != 0");
  const double a0 = a[0];
  for (double& v : b) v /= a0;
  for (double& v : a) v /= a0;
  IirCoefficients c;
  c.b = std::move(b);
  c.a = std::move(a);
  c.order = static_cast<int>(std::max(c.a.size(), c.b.size()) - 1);
  return c;
}

std::vector<cd> filter_poles(const IirCoefficients& coeffs) {
  std::size_t deg = coeffs.a.size() - 1;
  while (deg > 0 && coeffs.a[deg] == 0.0) --deg;
  if (deg == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg), static_cast<Eigen::Index>(deg));
  for (std::size_t j = 0; j < deg; ++j) companion(0, static_cast<Eigen::Index>(j)) = -coeffs.a[j + 1] / coeffs.a[0];
  for (std::size_t i = 1; i < deg; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  const auto ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

bool is_stable(const IirCoefficients& coeffs) {
  const auto poles = filter_poles(coeffs);
  return std::all_of(poles.begin(), poles.end(), [](const cd& p) { return std::abs(p) < 1.0; });
}

std::pair<Data, FilterState> apply_filter(const Data& data, const IirCoefficients& coeffs,
                                          const std::optional<FilterState>& state) {
  check_coefficients(coeffs);
  const std::size_t dim = axis_index(data, kTime);
  const auto layout = lanes_along(data, dim);
  auto [b, a] = padded(coeffs);
  const std::size_t order = b.size() - 1;

  FilterState next{layout.lanes(), order, {}};
  if (state) {
    if (state->lanes != layout.lanes() || state->order != order || state->z.size() != layout.lanes() * order) {
      fail(Errc::StateShapeMismatch, "filter state holds " + std::to_string(state->lanes) + " lanes of order " +
                                         std::to_string(state->order) + ", data needs " +
                                         std::to_string(layout.lanes()) + " of order " + std::to_string(order));
    }
    next.z = state->z;
  } else {
    next.z.assign(layout.lanes() * order, 0.0);
  }
  std::vector<double> y(data.size());
  kernels::omp::iir_df2t(b, a, layout, data.values(), y, next.z);
  return {with_replaced(data, data.shape(), std::move(y)), std::move(next)};
}

std::vector<double> step_initial_state(const IirCoefficients& coeffs) {
  auto [b, a] = padded(coeffs);
  const std::size_t n = b.size() - 1;
  if (n == 0) return {};
  const auto ni = static_cast<Eigen::Index>(n);
  // (I - companion(a)^T) zi = b[1:] - a[1:] * b[0]
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i) m(i, 0) += a[static_cast<std::size_t>(i) + 1];
  for (Eigen::Index i = 0; i + 1 < ni; ++i) m(i, i + 1) -= 1.0;
  Eigen::VectorXd rhs(ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    rhs(i) = b[static_cast<std::size_t>(i) + 1] - a[static_cast<std::size_t>(i) + 1] * b[0];
  }
  const Eigen::VectorXd zi = m.fullPivLu().solve(rhs);
  return {zi.data(), zi.data() + zi.size()};
}

Data filtfilt(const Data& data, const IirCoefficients& coeffs) {
  check_coefficients(coeffs);
  const std::size_t dim = axis_index(data, kTime);
  const auto layout = lanes_along(data, dim);
  auto [b, a] = padded(coeffs);
  const std::size_t order = b.size() - 1;
  const std::size_t pad = 3 * order;
  const std::size_t n = layout.n_time;
  if (n <= pad || n < 1) {
    fail(Errc::SignalTooShort, "zero-phase filtering needs more than " + std::to_string(pad) + " samples, got " +
                                   std::to_string(n));
  }

  // Odd extension: 2 x[0] - x[pad..1] in front, 2 x[n-1] - x[n-2..n-1-pad] behind.
  kernels::LaneLayout ext = layout;
  ext.n_time = n + 2 * pad;
  const auto vals = data.values();
  auto at = [&](std::size_t o, std::size_t t, std::size_t i) { return vals[(o * n + t) * layout.inner + i]; };
  std::vector<double> x(ext.size());
  for (std::size_t o = 0; o < ext.outer; ++o) {
    for (std::size_t t = 0; t < ext.n_time; ++t) {
      for (std::size_t i = 0; i < ext.inner; ++i) {
        double v;
        if (t < pad) {
          v = 2.0 * at(o, 0, i) - at(o, pad - t, i);
        } else if (t < pad + n) {
          v = at(o, t - pad, i);
        } else {
          v = 2.0 * at(o, n - 1, i) - at(o, n - 2 - (t - pad - n), i);
        }
        x[(o * ext.n_time + t) * ext.inner + i] = v;
      }
    }
  }

  const auto zi = step_initial_state(coeffs);
  std::vector<double> y(x.size());
  auto z = scaled_state(zi, x, ext);
  kernels::omp::iir_df2t(b, a, ext, x, y, z);
  x = reversed_time(y, ext);
  z = scaled_state(zi, x, ext);
  kernels::omp::iir_df2t(b, a, ext, x, y, z);
  x = reversed_time(y, ext);

  std::vector<double> out(data.size());
  for (std::size_t o = 0; o < layout.outer; ++o) {
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>((o * ext.n_time + pad) * ext.inner), n * layout.inner,
                out.begin() + static_cast<std::ptrdiff_t>(o * n * layout.inner));
  }
  return with_replaced(data, data.shape(), std::move(out));
}

Data subsample(const Data& data, double target_fs_hz) {
  const double fs = sampling_rate(data);
  if (!(target_fs_hz > 0.0)) fail(Errc::NonIntegerFactor, "target rate must be positive");
  const double ratio = fs / target_fs_hz;
  const double k_real = std::round(ratio);
  if (k_real < 1.0 || std::abs(ratio - k_real) > 1e-9 * ratio) {
    fail(Errc::NonIntegerFactor, std::to_string(fs) + " Hz is not an integer multiple of " +
                                     std::to_string(target_fs_hz) + " Hz");
  }
  const auto k = static_cast<std::size_t>(k_real);
  const std::size_t dim = axis_index(data, kTime);
  const auto& time = data.numeric_axis(dim);
  std::vector<std::size_t> idx;
  NumericAxis new_time;
  for (std::size_t t = 0; t < time.size(); t += k) {
    idx.push_back(t);
    new_time.push_back(time[t]);
  }
  Shape shape = data.shape();
  shape[dim] = idx.size();
  Data out = with_replaced(data, std::move(shape), take_along(data, dim, idx), {{dim, std::move(new_time), {}, {}}});
  return with_attribute(out, "fs", fs / k_real);
}

std::size_t epoch_length(double fs_hz, Interval interval) {
  if (!(interval.end_ms > interval.start_ms)) fail(Errc::EmptyInterval, "epoch interval must have end > start");
  const double n = std::round(interval.length_ms() * fs_hz / 1000.0);
  if (n < 1.0) fail(Errc::EmptyInterval, "epoch interval is shorter than one sample");
  return static_cast<std::size_t>(n);
}

std::vector<EpochWindow> epoch_windows(const Data& data, const MarkerList& markers, const ClassDefs& classes,
                                       Interval interval) {
  const double fs = sampling_rate(data);
  const std::size_t n = epoch_length(fs, interval);
  const std::size_t dim = axis_index(data, kTime);
  const auto& time = data.numeric_axis(dim);
  std::vector<EpochWindow> windows;
  if (time.empty()) return windows;
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const auto& m = markers[i];
    auto cls = std::find_if(classes.begin(), classes.end(), [&](const auto& c) { return c.first == m.label; });
    if (cls == classes.end()) continue;
    const double t0 = m.time_ms + interval.start_ms;
    if (t0 < time.front() - kMarkerSnapMs) continue;
    const std::size_t s = marker_sample(time, t0);
    if (s + n > time.size()) continue;
    windows.push_back({i, s, cls->second});
  }
  return windows;
}

Data segment(const Data& data, const MarkerList& markers, const ClassDefs& classes, Interval interval) {
  if (data.rank() != 2 || data.names()[0] != kTime || data.names()[1] != kChannel) {
    fail(Errc::DimensionMismatch, "segment expects continuous (time x channel) data");
  }
  const double fs = sampling_rate(data);
  const std::size_t n = epoch_length(fs, interval);
  const auto windows = epoch_windows(data, markers, classes, interval);
  const std::size_t nc = data.shape()[1];

  std::vector<double> values(windows.size() * n * nc);
  LabelAxis labels;
  const auto vals = data.values();
  for (std::size_t e = 0; e < windows.size(); ++e) {
    std::copy_n(vals.begin() + static_cast<std::ptrdiff_t>(windows[e].first_sample * nc), n * nc,
                values.begin() + static_cast<std::ptrdiff_t>(e * n * nc));
    labels.push_back(windows[e].class_name);
  }
  NumericAxis time(n);
  for (std::size_t j = 0; j < n; ++j) time[j] = interval.start_ms + static_cast<double>(j) * 1000.0 / fs;

  std::vector<std::string> class_names;
  for (const auto& [label, cls] : classes) {
    if (std::find(class_names.begin(), class_names.end(), cls) == class_names.end()) class_names.push_back(cls);
  }
  DataParts parts{{windows.size(), n, nc},
                  std::move(values),
                  {std::move(labels), std::move(time), data.label_axis(1)},
                  {std::string(kClass), std::string(kTime), std::string(kChannel)},
                  {"#", "ms", data.units()[1]},
                  data.extra(),
                  std::nullopt};
  parts.extra["class_names"] = class_names;
  parts.extra["fs"] = fs;
  return make_data(std::move(parts));
}

Data segment(const Data& data, const ClassDefs& classes, Interval interval) {
  static const MarkerList none;
  return segment(data, data.markers() ? *data.markers() : none, classes, interval);
}

Data select_time(const Data& data, Interval interval) {
  const std::size_t dim = axis_index(data, kTime);
  const auto& time = data.numeric_axis(dim);
  std::vector<std::size_t> keep;
  NumericAxis kept;
  for (std::size_t t = 0; t < time.size(); ++t) {
    if (interval.contains(time[t])) {
      keep.push_back(t);
      kept.push_back(time[t]);
    }
  }
  if (keep.empty()) fail(Errc::EmptyInterval, "no samples inside the time window");
  Shape shape = data.shape();
  shape[dim] = keep.size();
  return with_replaced(data, std::move(shape), take_along(data, dim, keep), {{dim, std::move(kept), {}, {}}});
}

Data remove_baseline(const Data& epo, Interval reference) {
  const std::size_t dim = axis_index(epo, kTime);
  const auto& time = epo.numeric_axis(dim);
  std::vector<std::size_t> ref;
  for (std::size_t t = 0; t < time.size(); ++t) {
    if (reference.contains(time[t])) ref.push_back(t);
  }
  if (ref.empty()) fail(Errc::EmptyReference, "reference interval holds no samples");
  const auto l = lanes_along(epo, dim);
  const auto vals = epo.values();
  std::vector<double> out(vals.begin(), vals.end());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t i = 0; i < l.inner; ++i) {
      double sum = 0.0;
      for (std::size_t t : ref) sum += vals[(o * l.n_time + t) * l.inner + i];
      const double mean = sum / static_cast<double>(ref.size());
      for (std::size_t t = 0; t < l.n_time; ++t) out[(o * l.n_time + t) * l.inner + i] -= mean;
    }
  }
  return with_replaced(epo, epo.shape(), std::move(out));
}

std::vector<double> make_window(Window window, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (window == Window::Hann) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
  }
  return w;
}

Data spectrum(const Data& data, Window window) {
  const std::size_t dim = axis_index(data, kTime);
  const std::size_t n = data.shape()[dim];
  if (n < 2) fail(Errc::TooFewSamples, "spectrum needs at least two samples");
  const double fs = sampling_rate(data);
  const auto layout = lanes_along(data, dim);
  const std::size_t nf = n / 2 + 1;
  std::vector<double> out(layout.outer * nf * layout.inner);
  kernels::omp::amplitude_spectra(make_window(window, n), layout, data.values(), out);
  NumericAxis freq(nf);
  for (std::size_t k = 0; k < nf; ++k) freq[k] = static_cast<double>(k) * fs / static_cast<double>(n);
  Shape shape = data.shape();
  shape[dim] = nf;
  Data result =
      with_replaced(data, std::move(shape), std::move(out), {{dim, std::move(freq), std::string(kFrequency), "Hz"}});
  return with_markers(result, std::nullopt);
}

std::size_t spectrogram_segments(std::size_t n_samples, std::size_t window_samples, double overlap_fraction) {
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
    fail(Errc::InvalidArgument, "overlap must lie in [0, 1)");
  }
  if (window_samples < 2 || window_samples > n_samples) {
    fail(Errc::WindowTooLarge, "window of " + std::to_string(window_samples) + " samples for a signal of " +
                                   std::to_string(n_samples));
  }
  const auto hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(static_cast<double>(window_samples) * (1.0 - overlap_fraction))));
  return 1 + (n_samples - window_samples) / hop;
}

Data spectrogram(const Data& data, std::size_t window_samples, double overlap_fraction) {
  if (data.rank() != 2 || data.names()[0] != kTime) {
    fail(Errc::DimensionMismatch, "spectrogram expects continuous (time x channel) data");
  }
  const std::size_t n = data.shape()[0];
  const std::size_t nc = data.shape()[1];
  const std::size_t segments = spectrogram_segments(n, window_samples, overlap_fraction);
  const auto hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(static_cast<double>(window_samples) * (1.0 - overlap_fraction))));
  const double fs = sampling_rate(data);
  const auto& time = data.numeric_axis(0);

  std::vector<double> block(segments * window_samples * nc);
  NumericAxis centres(segments);
  const auto vals = data.values();
  for (std::size_t s = 0; s < segments; ++s) {
    std::copy_n(vals.begin() + static_cast<std::ptrdiff_t>(s * hop * nc), window_samples * nc,
                block.begin() + static_cast<std::ptrdiff_t>(s * window_samples * nc));
    centres[s] = 0.5 * (time[s * hop] + time[s * hop + window_samples - 1]);
  }
  const kernels::LaneLayout layout{segments, window_samples, nc};
  const std::size_t nf = window_samples / 2 + 1;
  std::vector<double> out(segments * nf * nc);
  kernels::omp::amplitude_spectra(make_window(Window::Hann, window_samples), layout, block, out);
  NumericAxis freq(nf);
  for (std::size_t k = 0; k < nf; ++k) freq[k] = static_cast<double>(k) * fs / static_cast<double>(window_samples);

  DataParts parts{{segments, nf, nc},
                  std::move(out),
                  {std::move(centres), std::move(freq), data.axes()[1]},
                  {std::string(kTime), std::string(kFrequency), data.names()[1]},
                  {"ms", "Hz", data.units()[1]},
                  data.extra(),
                  std::nullopt};
  return make_data(std::move(parts));
}

}  // namespace bcitk
