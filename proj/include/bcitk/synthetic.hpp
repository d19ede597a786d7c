#pragma once

// Seeded generators for recordings with known ground truth.

#include <cstdint>
#include <string>

#include "bcitk/data.hpp"

namespace bcitk {

/// Row/column speller recording. Each character starts with a marker
/// "trial:<char>", followed after a pause by `repetitions` blocks of the 12
/// intensifications "R0".."R5" and "C0".."C5" in random order. Flashes of the
/// target row or column evoke a parietal positivity peaking near 300 ms; every
/// flash evokes an occipital visual response.
struct P300SynthConfig {
  std::size_t characters = 10;
  std::size_t repetitions = 15;
  double fs_hz = 240.0;
  double isi_ms = 175.0;
  double pause_ms = 2500.0;
  /// Peak amplitude of the target response in units of the background noise.
  double snr = 1.0;
  /// Fixes the background topographies; recordings sharing it come from the
  /// same "subject". `seed` drives everything else.
  std::uint64_t subject = 1;
  std::uint64_t seed = 1;
  /// Characters to spell; random matrix characters when empty.
  std::string text;
};

/// Continuous (time, channel) data, 16 EEG channels, with markers and
/// extra {"fs", "paradigm": "p300", "text"}.
Data synth_p300(const P300SynthConfig& config);

/// Two-class motor imagery trials on an 8x8 grid "E1".."E64". Two hidden
/// sources oscillating near 11 Hz change power with the class; background
/// sources and sensor noise are mixed in through a random matrix.
struct MotorImagerySynthConfig {
  std::size_t trials = 120;
  double fs_hz = 250.0;
  double trial_ms = 3000.0;
  /// Power ratio between the active and the suppressed state of a task source.
  double modulation = 4.0;
  /// Fixes the mixing matrix and background rhythms; train and test sets must
  /// share it. `seed` drives trial labels and noise.
  std::uint64_t subject = 2;
  std::uint64_t seed = 2;
};

/// Epoched (class, time, channel) data with classes "finger" and "tongue" in
/// random order, time axis 0 .. trial_ms.
Data synth_motor_imagery(const MotorImagerySynthConfig& config);

}  // namespace bcitk
