#pragma once

// Streaming containers for online processing.
//
// Both buffers are values: the append operations take the buffer by value and
// return the updated one, so `buf = ring_append(std::move(buf), chunk, m)`
// updates in place while `ring_append(buf, chunk, m)` leaves `buf` untouched.

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bcitk/data.hpp"

namespace bcitk {

/// Fixed-duration tail window over a continuous (time x channel) stream.
///
/// The capacity is converted to samples on the first append using the chunk's
/// sampling rate. Markers are tracked by absolute sample position and dropped
/// once their sample scrolls out; a marker on the first retained sample stays.
class RingBuffer {
 public:
  explicit RingBuffer(double capacity_ms);

  double capacity_ms() const noexcept { return capacity_ms_; }
  /// Zero until the first append fixes the sampling rate.
  std::size_t capacity_samples() const noexcept { return capacity_; }
  std::size_t stored_samples() const noexcept { return count_; }
  std::size_t total_appended_samples() const noexcept { return total_; }
  /// Absolute stream index of the oldest retained sample.
  std::size_t first_sample_index() const noexcept { return total_ - count_; }
  double sampling_rate() const noexcept { return fs_; }

 private:
  struct PendingMarker {
    std::size_t sample;
    double time_ms;
    std::string label;
  };

  friend RingBuffer ring_append(RingBuffer buffer, const Data& chunk, const MarkerList& markers);
  friend Data ring_window(const RingBuffer& buffer);

  std::size_t slot(std::size_t k) const noexcept { return (head_ + k) % capacity_; }

  double capacity_ms_;
  std::size_t capacity_ = 0;
  double fs_ = 0.0;
  bool configured_ = false;
  LabelAxis channels_;
  std::string unit_ = "#";
  Json extra_ = Json::object();
  std::vector<double> values_;  // capacity_ x channels, circular over rows
  std::vector<double> times_;   // capacity_, circular
  std::size_t head_ = 0;
  std::size_t count_ = 0;
  std::size_t total_ = 0;
  double last_time_ = 0.0;
  std::deque<PendingMarker> markers_;
};

/// Appends a chunk and its markers (times in the chunk's time base).
/// Throws ChannelMismatch / SamplingRateMismatch.
RingBuffer ring_append(RingBuffer buffer, const Data& chunk, const MarkerList& markers);

/// Snapshot of the retained window: time axis rebased to start at 0 and
/// markers relative to it.
std::pair<Data, MarkerList> ring_get(const RingBuffer& buffer);

/// Retained window with the original timestamps; markers (original times)
/// are attached to the returned Data.
Data ring_window(const RingBuffer& buffer);

/// Re-chunks arbitrary appends into whole multiples of a block size.
class BlockBuffer {
 public:
  explicit BlockBuffer(std::size_t block_samples);

  std::size_t block_samples() const noexcept { return block_; }
  std::size_t residue_samples() const noexcept { return residue_ ? residue_->shape()[0] : 0; }
  const std::optional<Data>& residue() const noexcept { return residue_; }

 private:
  friend std::pair<BlockBuffer, Data> block_append_drain(BlockBuffer buffer, const Data& chunk);
  friend std::pair<BlockBuffer, Data> block_flush(BlockBuffer buffer);

  std::size_t block_;
  std::optional<Data> residue_;
};

/// Appends a chunk and emits the largest whole number of blocks available.
/// Markers on the chunk travel with their samples. Throws ChannelMismatch.
std::pair<BlockBuffer, Data> block_append_drain(BlockBuffer buffer, const Data& chunk);

/// Emits whatever residue is left (end of stream).
std::pair<BlockBuffer, Data> block_flush(BlockBuffer buffer);

/// Concatenates continuous chunks along time. Markers and extra of the
/// result come from all inputs (extra from the last one).
Data concat_time(const Data& first, const Data& second);

}  // namespace bcitk
