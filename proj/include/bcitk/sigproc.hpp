#pragma once

// Signal processing: channel selection, Butterworth band-pass design, stateful
// IIR filtering, zero-phase filtering, decimation, epoching, baseline removal,
// amplitude spectra and spectrograms.
//
// Operations that work along time look the axis up by name ("time"), so they
// accept continuous (time, channel) as well as epoched (class, time, channel)
// data.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bcitk/data.hpp"

namespace bcitk {

struct Band {
  double low_hz = 0.0;
  double high_hz = 0.0;
};

/// Transfer-function coefficients, a[0] == 1.
struct IirCoefficients {
  std::vector<double> b;
  std::vector<double> a;
  Band band;
  int order = 0;
  double fs_hz = 0.0;
};

/// Delay-line state of a running filter: `order` values per lane, lane-major.
/// A lane is one 1-D series along time (one channel of continuous data).
struct FilterState {
  std::size_t lanes = 0;
  std::size_t order = 0;
  std::vector<double> z;
};

/// Keeps channels whose names match any glob pattern (`*`, `?`, `[...]`);
/// with `invert` drops them instead. Throws NoChannelsLeft.
Data select_channels(const Data& data, std::span<const std::string> patterns, bool invert = false);

/// Butterworth band-pass of the given prototype order (the transfer function
/// has degree 2 * order), designed from the analog prototype with a
/// pre-warped bilinear transform. Throws InvalidBand.
IirCoefficients design_bandpass(double low_hz, double high_hz, double fs_hz, int order);

/// Filter from raw coefficients; a is normalised so that a[0] == 1.
IirCoefficients make_coefficients(std::vector<double> b, std::vector<double> a);

/// Poles of the filter (roots of a).
std::vector<std::complex<double>> filter_poles(const IirCoefficients& coeffs);
bool is_stable(const IirCoefficients& coeffs);

/// Causal direct-form II transposed filtering along time, lanes independent.
/// Without a state the filter starts from rest. The returned state continues
/// the recursion on the next chunk. Throws StateShapeMismatch.
std::pair<Data, FilterState> apply_filter(const Data& data, const IirCoefficients& coeffs,
                                          const std::optional<FilterState>& state = std::nullopt);

/// Zero-phase forward-backward filtering with odd extension of
/// 3 * (len(a) - 1) samples on both ends and steady-state initial conditions.
/// Throws SignalTooShort.
Data filtfilt(const Data& data, const IirCoefficients& coeffs);

/// Steady-state delay line of the filter for a unit step input.
std::vector<double> step_initial_state(const IirCoefficients& coeffs);

/// Keeps every k-th sample from index 0, k = fs / target_fs. No anti-alias
/// filtering is done here: low-pass first. Markers are left as they are.
/// Throws NonIntegerFactor.
Data subsample(const Data& data, double target_fs_hz);

/// Marker label -> class name. The order of first appearance of each class
/// name fixes the class order of the epoched data.
using ClassDefs = std::vector<std::pair<std::string, std::string>>;

/// Location of one epoch inside continuous data.
struct EpochWindow {
  std::size_t marker_index = 0;  // into the marker list
  std::size_t first_sample = 0;
  std::string class_name;
};

std::size_t epoch_length(double fs_hz, Interval interval);

/// Windows [t + start, t + end) of the markers that map to a class and lie
/// fully inside the data, in marker order.
std::vector<EpochWindow> epoch_windows(const Data& data, const MarkerList& markers, const ClassDefs& classes,
                                       Interval interval);

/// Cuts epochs of round((end - start) * fs / 1000) samples. The result is
/// (class, time, channel); the time axis is start + j * 1000 / fs and the
/// class axis holds each epoch's class. Partial windows are skipped.
/// Throws EmptyInterval.
Data segment(const Data& data, const MarkerList& markers, const ClassDefs& classes, Interval interval);

/// Uses the markers attached to `data`.
Data segment(const Data& data, const ClassDefs& classes, Interval interval);

/// Keeps the samples whose time lies in `interval`. Throws EmptyInterval.
Data select_time(const Data& data, Interval interval);

/// Subtracts, per lane, the mean over the samples whose time falls in `reference`.
/// Throws EmptyReference.
Data remove_baseline(const Data& epo, Interval reference);

enum class Window { Hann, Rectangular };

/// Periodic window of length n.
std::vector<double> make_window(Window window, std::size_t n);

/// One-sided amplitude spectrum along time; the time axis becomes a
/// "frequency" axis in Hz from 0 to fs/2. Throws TooFewSamples.
Data spectrum(const Data& data, Window window = Window::Hann);

/// Hann-windowed short-time amplitude spectra of continuous data, shaped
/// (time, frequency, channel). hop = max(1, floor(window * (1 - overlap)));
/// the time axis holds segment centres. Throws WindowTooLarge.
Data spectrogram(const Data& data, std::size_t window_samples, double overlap_fraction);

std::size_t spectrogram_segments(std::size_t n_samples, std::size_t window_samples, double overlap_fraction);

}  // namespace bcitk
