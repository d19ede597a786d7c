#include "bcitk/buffers.hpp"

#include <algorithm>
#include <cmath>

#include "bcitk/error.hpp"

namespace bcitk {

namespace {

struct ContinuousView {
  const NumericAxis& time;
  const LabelAxis& channels;
  std::size_t n_samples;
  std::size_t n_channels;
};

ContinuousView continuous_view(const Data& data) {
  if (data.rank() != 2 || data.names()[0] != kTime || data.names()[1] != kChannel) {
    fail(Errc::DimensionMismatch, "expected continuous (time x channel) data");
  }
  return {data.numeric_axis(0), data.label_axis(1), data.shape()[0], data.shape()[1]};
}

// Rows [begin, end) of continuous data, without markers.
Data slice_rows(const Data& data, std::size_t begin, std::size_t end) {
  const auto view = continuous_view(data);
  const auto vals = data.values();
  std::vector<double> values(vals.begin() + static_cast<std::ptrdiff_t>(begin * view.n_channels),
                             vals.begin() + static_cast<std::ptrdiff_t>(end * view.n_channels));
  NumericAxis time(view.time.begin() + static_cast<std::ptrdiff_t>(begin),
                   view.time.begin() + static_cast<std::ptrdiff_t>(end));
  DataParts parts = data.parts();
  parts.shape[0] = end - begin;
  parts.values = std::move(values);
  parts.axes[0] = std::move(time);
  parts.markers.reset();
  return make_data(std::move(parts));
}

}  // namespace

Data concat_time(const Data& first, const Data& second) {
  const auto a = continuous_view(first);
  const auto b = continuous_view(second);
  if (a.channels != b.channels) fail(Errc::ChannelMismatch, "channel axes differ");
  DataParts parts = second.parts();
  parts.shape[0] = a.n_samples + b.n_samples;
  parts.values.assign(first.values().begin(), first.values().end());
  parts.values.insert(parts.values.end(), second.values().begin(), second.values().end());
  NumericAxis time = a.time;
  time.insert(time.end(), b.time.begin(), b.time.end());
  parts.axes[0] = std::move(time);
  if (first.markers() || second.markers()) {
    std::vector<Marker> all;
    if (first.markers()) all.insert(all.end(), first.markers()->begin(), first.markers()->end());
    if (second.markers()) all.insert(all.end(), second.markers()->begin(), second.markers()->end());
    parts.markers = MarkerList(std::move(all));
  }
  return make_data(std::move(parts));
}

RingBuffer::RingBuffer(double capacity_ms) : capacity_ms_(capacity_ms) {
  if (!(capacity_ms > 0.0)) fail(Errc::InvalidArgument, "ring buffer capacity must be positive");
}

RingBuffer ring_append(RingBuffer buffer, const Data& chunk, const MarkerList& markers) {
  const auto view = continuous_view(chunk);

  double chunk_fs = 0.0;
  if (chunk.extra().contains("fs") || view.n_samples >= 2) {
    chunk_fs = sampling_rate(chunk);
  } else if (buffer.configured_ && view.n_samples == 1 && buffer.total_ > 0) {
    chunk_fs = 1000.0 / (view.time[0] - buffer.last_time_);
  }

  if (!buffer.configured_) {
    if (view.n_samples == 0) return buffer;
    if (!(chunk_fs > 0.0)) {
      fail(Errc::SamplingRateMismatch, "cannot determine the sampling rate of the first chunk");
    }
    buffer.fs_ = chunk_fs;
    buffer.capacity_ = static_cast<std::size_t>(std::floor(buffer.capacity_ms_ * chunk_fs / 1000.0 + 1e-9));
    if (buffer.capacity_ == 0) fail(Errc::InvalidArgument, "ring buffer capacity is below one sample");
    buffer.channels_ = view.channels;
    buffer.unit_ = chunk.units()[1];
    buffer.values_.assign(buffer.capacity_ * view.n_channels, 0.0);
    buffer.times_.assign(buffer.capacity_, 0.0);
    buffer.configured_ = true;
  } else {
    if (view.channels != buffer.channels_) fail(Errc::ChannelMismatch, "chunk channels differ from the buffer's");
    if (chunk_fs > 0.0 && std::abs(chunk_fs - buffer.fs_) > 1e-6 * buffer.fs_) {
      fail(Errc::SamplingRateMismatch,
           "chunk at " + std::to_string(chunk_fs) + " Hz, buffer at " + std::to_string(buffer.fs_) + " Hz");
    }
  }
  buffer.extra_ = chunk.extra();

  const std::size_t before = buffer.total_;
  for (const auto& m : markers) {
    buffer.markers_.push_back({before + marker_sample(view.time, m.time_ms), m.time_ms, m.label});
  }
  std::stable_sort(buffer.markers_.begin(), buffer.markers_.end(),
                   [](const auto& x, const auto& y) { return x.sample < y.sample; });

  // Only the last `capacity_` samples of the chunk can survive.
  const std::size_t n = view.n_samples;
  const std::size_t nc = view.n_channels;
  const std::size_t skip = n > buffer.capacity_ ? n - buffer.capacity_ : 0;
  const auto vals = chunk.values();
  for (std::size_t t = skip; t < n; ++t) {
    std::size_t dst;
    if (buffer.count_ < buffer.capacity_) {
      dst = buffer.slot(buffer.count_);
      ++buffer.count_;
    } else {
      dst = buffer.head_;
      buffer.head_ = (buffer.head_ + 1) % buffer.capacity_;
    }
    std::copy_n(vals.begin() + static_cast<std::ptrdiff_t>(t * nc), nc,
                buffer.values_.begin() + static_cast<std::ptrdiff_t>(dst * nc));
    buffer.times_[dst] = view.time[t];
  }
  buffer.total_ += n;
  if (n > 0) buffer.last_time_ = view.time[n - 1];

  const std::size_t first = buffer.first_sample_index();
  while (!buffer.markers_.empty() && buffer.markers_.front().sample < first) buffer.markers_.pop_front();
  return buffer;
}

Data ring_window(const RingBuffer& buffer) {
  const std::size_t nc = buffer.channels_.size();
  std::vector<double> values(buffer.count_ * nc);
  NumericAxis time(buffer.count_);
  for (std::size_t k = 0; k < buffer.count_; ++k) {
    const std::size_t src = buffer.slot(k);
    std::copy_n(buffer.values_.begin() + static_cast<std::ptrdiff_t>(src * nc), nc,
                values.begin() + static_cast<std::ptrdiff_t>(k * nc));
    time[k] = buffer.times_[src];
  }
  MarkerList markers;
  for (const auto& m : buffer.markers_) {
    if (m.sample < buffer.total_) markers.add(m.time_ms, m.label);
  }
  DataParts parts{{buffer.count_, nc},
                  std::move(values),
                  {std::move(time), buffer.channels_},
                  {std::string(kTime), std::string(kChannel)},
                  {"ms", buffer.unit_},
                  buffer.extra_,
                  std::move(markers)};
  if (buffer.configured_) parts.extra["fs"] = buffer.fs_;
  return make_data(std::move(parts));
}

std::pair<Data, MarkerList> ring_get(const RingBuffer& buffer) {
  const Data window = ring_window(buffer);
  const auto& abs_time = window.numeric_axis(0);
  const double origin = abs_time.empty() ? 0.0 : abs_time.front();
  NumericAxis time(abs_time.size());
  for (std::size_t k = 0; k < time.size(); ++k) time[k] = abs_time[k] - origin;
  MarkerList markers;
  for (const auto& m : *window.markers()) markers.add(m.time_ms - origin, m.label);
  DataParts parts = window.parts();
  parts.axes[0] = std::move(time);
  parts.markers = markers;
  return {make_data(std::move(parts)), std::move(markers)};
}

BlockBuffer::BlockBuffer(std::size_t block_samples) : block_(block_samples) {
  if (block_samples == 0) fail(Errc::InvalidArgument, "block size must be positive");
}

std::pair<BlockBuffer, Data> block_append_drain(BlockBuffer buffer, const Data& chunk) {
  Data combined = buffer.residue_ ? concat_time(*buffer.residue_, chunk) : chunk;
  const auto view = continuous_view(combined);
  const std::size_t n = view.n_samples;
  const std::size_t emit = (n / buffer.block_) * buffer.block_;

  MarkerList emitted_markers;
  MarkerList kept_markers;
  if (combined.markers()) {
    for (const auto& m : *combined.markers()) {
      (marker_sample(view.time, m.time_ms) < emit ? emitted_markers : kept_markers).add(m.time_ms, m.label);
    }
  }
  Data emitted = with_markers(slice_rows(combined, 0, emit), std::move(emitted_markers));
  if (emit == n && kept_markers.empty()) {
    buffer.residue_.reset();
  } else {
    buffer.residue_ = with_markers(slice_rows(combined, emit, n), std::move(kept_markers));
  }
  return {std::move(buffer), std::move(emitted)};
}

std::pair<BlockBuffer, Data> block_flush(BlockBuffer buffer) {
  if (!buffer.residue_) fail(Errc::InvalidArgument, "block buffer is empty");
  Data out = std::move(*buffer.residue_);
  buffer.residue_.reset();
  return {std::move(buffer), std::move(out)};
}

}  // namespace bcitk
