#include <doctest.h>

#include "bcitk/buffers.hpp"
#include "common.hpp"

using namespace bcitk;
using namespace bcitk::testing;

namespace {

// Single-channel stream 1, 2, 3, ... at 1 kHz so one sample is one ms.
Data counting(std::size_t first, std::size_t n) {
  std::vector<double> v(n);
  NumericAxis t(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = static_cast<double>(first + i + 1);
    t[i] = static_cast<double>(first + i);
  }
  return with_attribute(make_continuous(v, t, {"x"}), "fs", 1000.0);
}

std::vector<double> values_of(const Data& d) { return {d.values().begin(), d.values().end()}; }

}  // namespace

TEST_SUITE("buffers") {
  TEST_CASE("ring keeps the tail") {
    RingBuffer r(5.0);
    r = ring_append(std::move(r), counting(0, 3), {});
    r = ring_append(std::move(r), counting(3, 4), {});
    CHECK(values_of(ring_window(r)) == std::vector<double>{3, 4, 5, 6, 7});
    CHECK(r.capacity_samples() == 5);
    CHECK(r.total_appended_samples() == 7);
    CHECK(r.first_sample_index() == 2);
  }

  TEST_CASE("chunk larger than the capacity") {
    RingBuffer r(5.0);
    r = ring_append(std::move(r), counting(0, 8), {});
    CHECK(values_of(ring_window(r)) == std::vector<double>{4, 5, 6, 7, 8});
  }

  TEST_CASE("markers scroll out with their sample") {
    RingBuffer r(5.0);
    MarkerList m;
    m.add(1.0, "gone");  // sample 1 of the first chunk
    m.add(2.0, "edge");  // sample 2 = first retained sample after the second append
    r = ring_append(std::move(r), counting(0, 3), m);
    CHECK(ring_window(r).markers()->size() == 2);
    r = ring_append(std::move(r), counting(3, 4), {});
    const auto [win, markers] = ring_get(r);
    REQUIRE(markers.size() == 1);
    CHECK(markers[0].label == "edge");
    CHECK(markers[0].time_ms == 0.0);  // re-based to the window start
    CHECK(win.numeric_axis(0).front() == 0.0);
    CHECK(ring_window(r).markers()->entries()[0].time_ms == 2.0);
  }

  TEST_CASE("marker past the chunk stays hidden until its sample arrives") {
    RingBuffer r(50.0);
    MarkerList m;
    m.add(4.5, "ahead");
    r = ring_append(std::move(r), counting(0, 3), m);
    CHECK(ring_window(r).markers()->empty());
    r = ring_append(std::move(r), counting(3, 3), {});
    CHECK(ring_window(r).markers()->size() == 1);
  }

  TEST_CASE("ring_get on an empty buffer and read-only snapshots") {
    RingBuffer r(10.0);
    const auto [empty, none] = ring_get(r);
    CHECK(empty.shape()[0] == 0);
    CHECK(none.empty());
    r = ring_append(std::move(r), counting(0, 10), {});
    CHECK(values_of(ring_window(r)) == values_of(counting(0, 10)));
    CHECK(data_equal(ring_get(r).first, ring_get(r).first));
  }

  TEST_CASE("ring rejects other channels and rates") {
    RingBuffer r(10.0);
    r = ring_append(std::move(r), counting(0, 3), {});
    const Data other = with_attribute(make_continuous({1.0}, {3.0}, {"y"}), "fs", 1000.0);
    CHECK(code_of([&] { (void)ring_append(r, other, {}); }) == Errc::ChannelMismatch);
    const Data slow = with_attribute(make_continuous({1.0, 2.0}, {3.0, 5.0}, {"x"}), "fs", 500.0);
    CHECK(code_of([&] { (void)ring_append(r, slow, {}); }) == Errc::SamplingRateMismatch);
  }

  TEST_CASE("ring append is associative in content") {
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
      const Data all = noise_signal(rng, 120, 2, 250.0);
      const auto cuts = random_partition(rng, 120, 6);
      RingBuffer pieces(200.0), whole(200.0);
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        pieces = ring_append(std::move(pieces), slice_rows(all, cuts[k], cuts[k + 1]), {});
      }
      whole = ring_append(std::move(whole), all, {});
      CHECK(data_equal(ring_window(pieces), ring_window(whole)));
    }
  }

  TEST_CASE("block buffer emits whole blocks") {
    BlockBuffer b(4);
    auto [b1, e1] = block_append_drain(std::move(b), counting(0, 6));
    CHECK(values_of(e1) == std::vector<double>{1, 2, 3, 4});
    CHECK(b1.residue_samples() == 2);
    auto [b2, e2] = block_append_drain(std::move(b1), counting(6, 3));
    CHECK(values_of(e2) == std::vector<double>{5, 6, 7, 8});
    CHECK(b2.residue_samples() == 1);
    auto [b3, rest] = block_flush(std::move(b2));
    CHECK(values_of(rest) == std::vector<double>{9});
    CHECK(b3.residue_samples() == 0);
  }

  TEST_CASE("block below the block size") {
    auto [b, e] = block_append_drain(BlockBuffer(4), counting(0, 3));
    CHECK(e.shape()[0] == 0);
    CHECK(b.residue_samples() == 3);
  }

  TEST_CASE("block markers travel with their samples") {
    MarkerList m;
    m.add(1.0, "first block");
    m.add(5.0, "residue");
    auto [b, e] = block_append_drain(BlockBuffer(4), with_markers(counting(0, 6), m));
    REQUIRE(e.markers());
    REQUIRE(e.markers()->size() == 1);
    CHECK(e.markers()->entries()[0].label == "first block");
    auto [b2, e2] = block_append_drain(std::move(b), counting(6, 2));
    REQUIRE(e2.markers());
    CHECK(e2.markers()->entries()[0].label == "residue");
  }

  TEST_CASE("block flush of an empty buffer and channel checks") {
    CHECK(code_of([] { (void)block_flush(BlockBuffer(4)); }) == Errc::InvalidArgument);
    auto [b, e] = block_append_drain(BlockBuffer(4), counting(0, 2));
    const Data other = with_attribute(make_continuous({1.0}, {2.0}, {"y"}), "fs", 1000.0);
    CHECK(code_of([&] { (void)block_append_drain(b, other); }) == Errc::ChannelMismatch);
  }

  TEST_CASE("block reassembly over random partitions") {
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
      const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 200)(rng);
      const std::size_t block = std::uniform_int_distribution<std::size_t>(1, 16)(rng);
      const Data all = noise_signal(rng, n, 2, 100.0);
      const auto cuts = random_partition(rng, n, std::uniform_int_distribution<std::size_t>(1, 10)(rng));
      BlockBuffer b(block);
      std::vector<double> out;
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        auto [next, e] = block_append_drain(std::move(b), slice_rows(all, cuts[k], cuts[k + 1]));
        b = std::move(next);
        out.insert(out.end(), e.values().begin(), e.values().end());
      }
      const std::size_t emitted = (n / block) * block;
      CHECK(out.size() == emitted * 2);
      CHECK(std::equal(out.begin(), out.end(), all.values().begin()));
      CHECK(b.residue_samples() == n - emitted);
    }
  }

  TEST_CASE("concat_time joins markers and checks channels") {
    const Data a = with_markers(counting(0, 2), MarkerList({{0.0, "a"}}));
    const Data b = with_markers(counting(2, 2), MarkerList({{3.0, "b"}}));
    const Data c = concat_time(a, b);
    CHECK(values_of(c) == std::vector<double>{1, 2, 3, 4});
    CHECK(c.markers()->size() == 2);
    CHECK(code_of([&] { concat_time(a, with_attribute(make_continuous({1.0}, {9.0}, {"y"}), "fs", 1000.0)); }) ==
          Errc::ChannelMismatch);
  }
}
