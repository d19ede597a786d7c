#pragma once

// Replay of recorded data as an emulated amplifier, and the row/column
// speller decision rule.

#include <array>
#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bcitk/data.hpp"

namespace bcitk {

/// 6x6 speller matrix, row-major.
inline constexpr std::string_view kSpellerMatrix = "ABCDEFGHIJKLMNOPQRSTUVWXYZ123456789_";

struct ReplaySource {
  Data source;  // continuous (time, channel), markers attached
  std::size_t block_samples = 1;
  /// Pace chunks at the sampling rate instead of emitting them immediately.
  bool realtime = false;
};

struct Chunk {
  Data data;  // no markers attached; extra of the source
  MarkerList markers;
};

/// Emits ceil(N / block) chunks in order; the last one may be short. Each
/// marker goes out once, with the chunk holding its sample (markers past the
/// end go with the last chunk).
class Replayer {
 public:
  /// Throws InvalidArgument when block_samples is 0 or the data is not continuous.
  explicit Replayer(ReplaySource src);

  std::size_t chunk_count() const noexcept { return chunks_; }
  /// The next chunk, or nothing at the end. In realtime mode blocks until the
  /// chunk's last sample would have been acquired.
  std::optional<Chunk> next();

 private:
  ReplaySource src_;
  std::size_t chunks_ = 0;
  std::size_t emitted_ = 0;
  std::vector<std::size_t> marker_chunk_;
  std::chrono::steady_clock::time_point start_;
};

/// All chunks at once, ignoring realtime pacing.
std::vector<Chunk> replay_chunks(const ReplaySource& src);

/// One classifier score for an intensification "R<i>" or "C<j>".
struct StimulusScore {
  std::string label;
  double score = 0.0;
};

struct SpellerResult {
  char character = '?';
  std::size_t row = 0;
  std::size_t col = 0;
  std::array<double, 6> row_sums{};
  std::array<double, 6> col_sums{};
};

/// Sums the scores per row and column and picks the argmax row and column,
/// ties to the lowest index. Throws IncompleteSequence unless each of the 12
/// labels occurs exactly `repetitions` times (unknown labels included).
SpellerResult speller_decision(const std::vector<StimulusScore>& scores, std::size_t repetitions);

/// Row and column of a matrix character. Throws InvalidArgument.
std::pair<std::size_t, std::size_t> speller_position(char c);

/// "R<i>" -> (true, i), "C<j>" -> (false, j); nothing for other labels.
std::optional<std::pair<bool, std::size_t>> parse_stimulus(const std::string& label);

}  // namespace bcitk
