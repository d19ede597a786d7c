#include "bcitk/online.hpp"

#include <algorithm>
#include <charconv>
#include <thread>

#include "bcitk/error.hpp"

namespace bcitk {

Replayer::Replayer(ReplaySource src) : src_(std::move(src)) {
  const Data& d = src_.source;
  if (src_.block_samples == 0) fail(Errc::InvalidArgument, "block size must be at least one sample");
  if (d.rank() != 2 || d.names()[0] != kTime || d.names()[1] != kChannel) {
    fail(Errc::InvalidArgument, "replay needs continuous (time, channel) data");
  }
  if (!d.extra().contains("fs")) src_.source = with_attribute(d, "fs", sampling_rate(d));
  const std::size_t n = src_.source.shape()[0];
  chunks_ = (n + src_.block_samples - 1) / src_.block_samples;
  if (src_.source.markers()) {
    const auto& time = src_.source.numeric_axis(0);
    for (const auto& m : *src_.source.markers()) {
      const std::size_t s = marker_sample(time, m.time_ms);
      marker_chunk_.push_back(chunks_ == 0 ? 0 : std::min(s / src_.block_samples, chunks_ - 1));
    }
  }
  start_ = std::chrono::steady_clock::now();
}

std::optional<Chunk> Replayer::next() {
  if (emitted_ >= chunks_) return std::nullopt;
  const Data& d = src_.source;
  const std::size_t n = d.shape()[0], nc = d.shape()[1];
  const std::size_t first = emitted_ * src_.block_samples;
  const std::size_t last = std::min(n, first + src_.block_samples);
  const auto& time = d.numeric_axis(0);

  if (src_.realtime) {
    const double fs = d.extra()["fs"].get<double>();
    const auto due = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                  std::chrono::duration<double>(static_cast<double>(last) / fs));
    std::this_thread::sleep_until(due);
  }

  std::vector<double> values(d.values().begin() + static_cast<std::ptrdiff_t>(first * nc),
                             d.values().begin() + static_cast<std::ptrdiff_t>(last * nc));
  NumericAxis t(time.begin() + static_cast<std::ptrdiff_t>(first), time.begin() + static_cast<std::ptrdiff_t>(last));
  DataParts parts{{last - first, nc}, std::move(values), {std::move(t), d.axes()[1]}, d.names(), d.units(),
                  d.extra(),          std::nullopt};
  Chunk chunk{make_data(std::move(parts)), {}};
  if (d.markers()) {
    for (std::size_t i = 0; i < marker_chunk_.size(); ++i) {
      if (marker_chunk_[i] == emitted_) chunk.markers.add((*d.markers())[i].time_ms, (*d.markers())[i].label);
    }
  }
  ++emitted_;
  return chunk;
}

std::vector<Chunk> replay_chunks(const ReplaySource& src) {
  ReplaySource fast = src;
  fast.realtime = false;
  Replayer r(std::move(fast));
  std::vector<Chunk> out;
  while (auto c = r.next()) out.push_back(std::move(*c));
  return out;
}

std::optional<std::pair<bool, std::size_t>> parse_stimulus(const std::string& label) {
  if (label.size() != 2 || (label[0] != 'R' && label[0] != 'C')) return std::nullopt;
  if (label[1] < '0' || label[1] > '5') return std::nullopt;
  return std::make_pair(label[0] == 'R', static_cast<std::size_t>(label[1] - '0'));
}

std::pair<std::size_t, std::size_t> speller_position(char c) {
  const auto pos = kSpellerMatrix.find(c);
  if (pos == std::string_view::npos) fail(Errc::InvalidArgument, std::string("'") + c + "' is not a speller character");
  return {pos / 6, pos % 6};
}

SpellerResult speller_decision(const std::vector<StimulusScore>& scores, std::size_t repetitions) {
  std::array<std::size_t, 12> counts{};
  SpellerResult r;
  for (const auto& s : scores) {
    const auto stim = parse_stimulus(s.label);
    if (!stim) fail(Errc::IncompleteSequence, "unknown intensification label '" + s.label + "'");
    const auto [is_row, idx] = *stim;
    ++counts[(is_row ? 0 : 6) + idx];
    (is_row ? r.row_sums : r.col_sums)[idx] += s.score;
  }
  for (std::size_t k = 0; k < 12; ++k) {
    if (counts[k] != repetitions) {
      fail(Errc::IncompleteSequence, std::string(k < 6 ? "R" : "C") + std::to_string(k % 6) + " seen " +
                                         std::to_string(counts[k]) + " times, expected " + std::to_string(repetitions));
    }
  }
  r.row = static_cast<std::size_t>(std::max_element(r.row_sums.begin(), r.row_sums.end()) - r.row_sums.begin());
  r.col = static_cast<std::size_t>(std::max_element(r.col_sums.begin(), r.col_sums.end()) - r.col_sums.begin());
  r.character = kSpellerMatrix[r.row * 6 + r.col];
  return r;
}

}  // namespace bcitk
