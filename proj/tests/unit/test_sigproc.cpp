#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "bcitk/sigproc.hpp"
#include "common.hpp"

using namespace bcitk;
using namespace bcitk::testing;

namespace {

// |H(e^{jw})| straight from the polynomial coefficients.
double magnitude(const IirCoefficients& c, double f_hz) {
  const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * f_hz / c.fs_hz);
  std::complex<double> num = 0.0, den = 0.0, zk = 1.0;
  for (std::size_t k = 0; k < std::max(c.b.size(), c.a.size()); ++k) {
    if (k < c.b.size()) num += c.b[k] * zk;
    if (k < c.a.size()) den += c.a[k] * zk;
    zk *= z;
  }
  return std::abs(num / den);
}

double peak_magnitude(const IirCoefficients& c) {
  double peak = 0.0;
  for (int i = 1; i < 20000; ++i) peak = std::max(peak, magnitude(c, c.fs_hz / 2.0 * i / 20000.0));
  return peak;
}

Data sine(double f_hz, double fs, std::size_t n, double amp = 1.0, double phase = 0.0) {
  std::vector<double> v(n);
  for (std::size_t t = 0; t < n; ++t) v[t] = amp * std::sin(2.0 * std::numbers::pi * f_hz * t / fs + phase);
  return with_attribute(make_continuous(v, time_axis(n, fs), {"s"}), "fs", fs);
}

std::vector<double> values_of(const Data& d) { return {d.values().begin(), d.values().end()}; }

}  // namespace

TEST_SUITE("sigproc") {
  TEST_CASE("select_channels uses glob patterns") {
    const Data d = make_continuous({1, 2, 3, 4}, {0.0}, {"Cz", "C3", "C4", "P7"});
    const std::vector<std::string> c{"C*"};
    CHECK(select_channels(d, c).label_axis(1) == LabelAxis{"Cz", "C3", "C4"});
    CHECK(values_of(select_channels(d, c)) == std::vector<double>{1, 2, 3});
    CHECK(select_channels(d, c, true).label_axis(1) == LabelAxis{"P7"});
    const std::vector<std::string> none{"Z9"};
    CHECK(code_of([&] { select_channels(d, none); }) == Errc::NoChannelsLeft);
    const std::vector<std::string> q{"C?", "P[0-9]"};
    CHECK(select_channels(d, q).label_axis(1) == LabelAxis{"Cz", "C3", "C4", "P7"});
  }

  TEST_CASE("band-pass matches reference coefficients") {
    // Reference values from an independent Butterworth design (scipy.signal.butter(5, [8, 15], 'band', fs=100)).
    const std::vector<double> b{0.00027193, 0, -0.00135963, 0, 0.00271926, 0, -0.00271926, 0, 0.00135963, 0, -0.00027193};
    const std::vector<double> a{1,           -6.59467072, 21.06468235, -42.40550955, 59.29103228, -59.99599173,
                                44.46090098, -23.84198725, 8.87888921, -2.0844766,   0.23747213};
    const auto c = design_bandpass(8.0, 15.0, 100.0, 5);
    REQUIRE(c.b.size() == 11);
    REQUIRE(c.a.size() == 11);
    for (std::size_t k = 0; k < 11; ++k) {
      CHECK(std::abs(c.b[k] - b[k]) < 5e-9);
      CHECK(std::abs(c.a[k] - a[k]) < 5e-8);
    }
    CHECK(c.a[0] == 1.0);
    CHECK(c.order == 5);
    CHECK(c.band.low_hz == 8.0);
  }

  TEST_CASE("band-pass frequency response") {
    const auto wide = design_bandpass(0.1, 60.0, 240.0, 5);
    CHECK(is_stable(wide));
    const double db = 20.0 * std::log10(magnitude(wide, std::sqrt(0.1 * 60.0)) / peak_magnitude(wide));
    CHECK(db >= -3.1);
    CHECK(db <= 0.0);

    const auto narrow = design_bandpass(8.0, 15.0, 100.0, 5);
    CHECK(is_stable(narrow));
    const double peak = peak_magnitude(narrow);
    CHECK(magnitude(narrow, 11.0) >= 0.89 * peak);
    CHECK(magnitude(narrow, 50.0) <= 0.01 * peak);
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("pole radii match the reference design") {
    auto radius = [](const IirCoefficients& c) {
      double r = 0.0;
      for (const auto& p : filter_poles(c)) r = std::max(r, std::abs(p));
      return r;
    };
    CHECK(radius(design_bandpass(0.1, 60.0, 240.0, 5)) == doctest::Approx(0.99919).epsilon(2e-5));
    CHECK(radius(design_bandpass(8.0, 15.0, 100.0, 5)) == doctest::Approx(0.9512).epsilon(2e-4));
  }

  TEST_CASE("invalid bands") {
    CHECK(code_of([] { design_bandpass(60.0, 0.1, 240.0, 5); }) == Errc::InvalidBand);
    CHECK(code_of([] { design_bandpass(1.0, 120.0, 240.0, 5); }) == Errc::InvalidBand);
    CHECK(code_of([] { design_bandpass(0.0, 10.0, 240.0, 5); }) == Errc::InvalidBand);
    CHECK(code_of([] { design_bandpass(1.0, 10.0, 240.0, 0); }) == Errc::InvalidBand);
  }

  TEST_CASE("make_coefficients normalises a[0]") {
    const auto c = make_coefficients({2.0, 4.0}, {2.0, -1.0});
    CHECK(c.b == std::vector<double>{1.0, 2.0});
    CHECK(c.a == std::vector<double>{1.0, -0.5});
    CHECK(is_stable(c));
    CHECK_FALSE(is_stable(make_coefficients({1.0}, {1.0, -1.5})));
  }

  TEST_CASE("apply_filter rejects DC and the identity filter is exact") {
    const auto c = design_bandpass(8.0, 15.0, 100.0, 5);
    const std::size_t n = 3000;
    const Data ones = with_attribute(make_continuous(std::vector<double>(n, 1.0), time_axis(n, 100.0), {"x"}), "fs", 100.0);
    const auto y = apply_filter(ones, c).first;
    CHECK(std::abs(y.values()[n - 1]) < 1e-6);

    Rng rng(1);
    const Data x = noise_signal(rng, 200, 3, 100.0);
    CHECK(values_of(apply_filter(x, make_coefficients({1.0}, {1.0})).first) == values_of(x));
  }

  TEST_CASE("chunked filtering equals one pass") {
    Rng rng(2);
    const auto c = design_bandpass(0.5, 30.0, 240.0, 4);
    const Data x = noise_signal(rng, 1000, 4, 240.0);
    const auto whole = values_of(apply_filter(x, c).first);
    for (std::size_t split : {1, 17, 500, 999}) {
      auto [y1, s] = apply_filter(slice_rows(x, 0, split), c);
      auto [y2, s2] = apply_filter(slice_rows(x, split, 1000), c, s);
      auto joined = values_of(y1);
      const auto tail = values_of(y2);
      joined.insert(joined.end(), tail.begin(), tail.end());
      double worst = 0.0;
      for (std::size_t i = 0; i < joined.size(); ++i) worst = std::max(worst, std::abs(joined[i] - whole[i]));
      CHECK(worst < 1e-12);
    }
    FilterState wrong{2, c.a.size() - 1, std::vector<double>(2 * (c.a.size() - 1))};
    CHECK(code_of([&] { apply_filter(x, c, wrong); }) == Errc::StateShapeMismatch);
  }

  TEST_CASE("filtering is linear") {
    Rng rng(3);
    const auto c = design_bandpass(1.0, 40.0, 250.0, 3);
    const Data x = noise_signal(rng, 500, 2, 250.0), y = noise_signal(rng, 500, 2, 250.0);
    std::vector<double> mix(x.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.5 * x.values()[i] - 0.75 * y.values()[i];
    const auto fm = values_of(apply_filter(with_replaced(x, x.shape(), mix), c).first);
    const auto fx = values_of(apply_filter(x, c).first), fy = values_of(apply_filter(y, c).first);
    double worst = 0.0;
    for (std::size_t i = 0; i < mix.size(); ++i) worst = std::max(worst, std::abs(fm[i] - (2.5 * fx[i] - 0.75 * fy[i])));
    CHECK(worst < 1e-10);
  }

  TEST_CASE("filtering epoched data runs along time per epoch") {
    Rng rng(4);
    const auto c = design_bandpass(2.0, 20.0, 100.0, 2);
    const Data epo = make_epochs(normals(rng, 3 * 50 * 2), {"a", "b", "a"}, 50, 2, 100.0, {"a", "b"});
    const Data f = apply_filter(epo, c).first;
    // Epoch 1 alone, as continuous data.
    std::vector<double> one(epo.values().begin() + 100, epo.values().begin() + 200);
    const Data cont = with_attribute(make_continuous(one, time_axis(50, 100.0), channel_names(2)), "fs", 100.0);
    const auto ref = values_of(apply_filter(cont, c).first);
    CHECK(std::equal(ref.begin(), ref.end(), f.values().begin() + 100));
  }

  TEST_CASE("steady state for a step input") {
    const auto c = design_bandpass(0.5, 30.0, 240.0, 4);
    const auto zi = step_initial_state(c);
    CHECK(zi.size() == c.a.size() - 1);
    // Low-pass: a step is passed through at unit gain from the first sample.
    const auto lp = make_coefficients({0.2, 0.2}, {1.0, -0.6});
    const auto z = step_initial_state(lp);
    const Data ones = with_attribute(make_continuous(std::vector<double>(20, 1.0), time_axis(20, 100.0), {"x"}), "fs", 100.0);
    const auto y = apply_filter(ones, lp, FilterState{1, 1, z}).first;
    for (double v : y.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("filtfilt has zero phase") {
    const double fs = 100.0;
    const auto c = design_bandpass(5.0, 20.0, fs, 4);
    const Data x = sine(10.0, fs, 1000);
    const auto y = values_of(filtfilt(x, c));
    // Cross-correlation over the middle part peaks at lag 0.
    int best = 99;
    double best_v = -1e300;
    for (int lag = -5; lag <= 5; ++lag) {
      double acc = 0.0;
      for (std::size_t t = 200; t < 800; ++t) acc += x.values()[t] * y[static_cast<std::size_t>(static_cast<int>(t) + lag)];
      if (acc > best_v) {
        best_v = acc;
        best = lag;
      }
    }
    CHECK(best == 0);
  }

  TEST_CASE("filtfilt commutes with time reversal") {
    Rng rng(5);
    const auto c = design_bandpass(1.0, 20.0, 100.0, 3);
    const Data x = noise_signal(rng, 2000, 2, 100.0);
    std::vector<double> rev(x.size());
    for (std::size_t t = 0; t < 2000; ++t)
      for (std::size_t ch = 0; ch < 2; ++ch) rev[t * 2 + ch] = x.values()[(1999 - t) * 2 + ch];
    const auto a = values_of(filtfilt(x, c));
    const auto b = values_of(filtfilt(with_replaced(x, x.shape(), rev), c));
    double worst = 0.0;
    // Edge transients differ because each pass starts from its own end value;
    // they decay well before the middle.
    for (std::size_t t = 800; t < 1200; ++t)
      for (std::size_t ch = 0; ch < 2; ++ch) worst = std::max(worst, std::abs(a[t * 2 + ch] - b[(1999 - t) * 2 + ch]));
    CHECK(worst < 1e-6);
  }

  TEST_CASE("filtfilt needs more samples than the padding") {
    const auto c = design_bandpass(1.0, 20.0, 100.0, 5);
    const Data x = with_attribute(make_continuous({1.0, 2.0}, {0.0, 10.0}, {"x"}), "fs", 100.0);
    CHECK(code_of([&] { filtfilt(x, c); }) == Errc::SignalTooShort);
  }

  TEST_CASE("subsample keeps every k-th sample") {
    std::vector<double> v(10);
    std::iota(v.begin(), v.end(), 0.0);
    const Data x = with_attribute(make_continuous(v, time_axis(10, 240.0), {"x"}), "fs", 240.0);
    const Data y = subsample(x, 120.0);
    CHECK(values_of(y) == std::vector<double>{0, 2, 4, 6, 8});
    CHECK(y.extra()["fs"] == 120.0);
    CHECK(y.numeric_axis(0)[1] == x.numeric_axis(0)[2]);
    CHECK(data_equal(subsample(x, 240.0), x));
    CHECK(code_of([&] { subsample(x, 100.0); }) == Errc::NonIntegerFactor);

    Rng rng(6);
    const Data z = with_markers(noise_signal(rng, 97, 2, 1200.0), MarkerList({{3.0, "m"}}));
    CHECK(data_equal(subsample(subsample(z, 600.0), 200.0), subsample(z, 200.0)));
    CHECK(*subsample(z, 200.0).markers() == *z.markers());
  }

  TEST_CASE("segment cuts fixed-length windows") {
    Rng rng(7);
    const Data x = noise_signal(rng, 300, 2, 100.0);
    const ClassDefs defs{{"S1", "target"}, {"S2", "nontarget"}};
    const Data e = segment(x, MarkerList({{1000.0, "S1"}}), defs, {-200.0, 800.0});
    REQUIRE(e.shape() == Shape{1, 100, 2});
    // Samples with timestamps [800, 1800): rows 80..179.
    CHECK(std::equal(e.values().begin(), e.values().end(), x.values().begin() + 160));
    CHECK(e.numeric_axis(1).front() == -200.0);
    CHECK(e.numeric_axis(1).back() == doctest::Approx(790.0));

    CHECK(segment(x, MarkerList({{50.0, "S1"}}), defs, {-200.0, 800.0}).shape()[0] == 0);

    const Data two = segment(x, MarkerList({{500.0, "S1"}, {900.0, "S2"}, {950.0, "other"}}), defs, {0.0, 300.0});
    CHECK(two.label_axis(0) == LabelAxis{"target", "nontarget"});
    CHECK(class_order(two) == std::vector<std::string>{"target", "nontarget"});
    CHECK(code_of([&] { segment(x, MarkerList{}, defs, {10.0, 10.0}); }) == Errc::EmptyInterval);
  }

  TEST_CASE("segment length does not depend on marker phase") {
    Rng rng(8);
    const Data x = noise_signal(rng, 500, 1, 240.0);
    MarkerList m;
    for (int i = 0; i < 40; ++i) m.add(100.0 + i * 37.3, "s");
    const Data e = segment(x, m, {{"s", "s"}}, {-100.0, 600.0});
    CHECK(e.shape()[1] == epoch_length(240.0, {-100.0, 600.0}));
    CHECK(e.shape()[1] == 168);
  }

  TEST_CASE("remove_baseline") {
    const Data five = make_epochs(std::vector<double>(8, 5.0), {"a", "b"}, 4, 1, 100.0, {"a", "b"});
    const Data flat = remove_baseline(five, {0.0, 20.0});
    for (double v : flat.values()) CHECK(v == 0.0);

    const Data ramp = make_epochs({1, 2, 3, 4}, {"a"}, 4, 1, 100.0, {"a"});
    CHECK(values_of(remove_baseline(ramp, {0.0, 20.0})) == std::vector<double>{-0.5, 0.5, 1.5, 2.5});
    CHECK(code_of([&] { remove_baseline(ramp, {100.0, 200.0}); }) == Errc::EmptyReference);

    Rng rng(9);
    const Data r = make_epochs(normals(rng, 3 * 20 * 2), {"a", "b", "a"}, 20, 2, 100.0, {"a", "b"});
    const auto once = values_of(remove_baseline(r, {0.0, 50.0}));
    const auto twice = values_of(remove_baseline(remove_baseline(r, {0.0, 50.0}), {0.0, 50.0}));
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(std::abs(once[i] - twice[i]) < 1e-12);
  }

  TEST_CASE("select_time keeps the interval") {
    Rng rng(10);
    const Data e = make_epochs(normals(rng, 2 * 10 * 1), {"a", "b"}, 10, 1, 100.0, {"a", "b"});
    const Data s = select_time(e, {20.0, 50.0});
    CHECK(s.numeric_axis(1) == NumericAxis{20.0, 30.0, 40.0});
    CHECK(code_of([&] { select_time(e, {200.0, 300.0}); }) == Errc::EmptyInterval);
  }

  TEST_CASE("spectrum peaks") {
    const Data s = spectrum(sine(10.0, 240.0, 240), Window::Rectangular);
    const auto v = s.values();
    const auto k = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    CHECK(s.numeric_axis(0)[k] == doctest::Approx(10.0));
    CHECK(s.numeric_axis(0).back() == doctest::Approx(120.0));
    CHECK(s.units()[0] == "Hz");
    // Bin-centred sine: amplitude recovered with either window.
    CHECK(v[k] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spectrum(sine(10.0, 240.0, 240, 3.0)).values()[10] == doctest::Approx(3.0).epsilon(1e-12));

    const Data zero = with_attribute(make_continuous(std::vector<double>(64, 0.0), time_axis(64, 64.0), {"z"}), "fs", 64.0);
    for (double a : spectrum(zero).values()) CHECK(a == 0.0);

    std::vector<double> both(240);
    for (std::size_t t = 0; t < 240; ++t) {
      both[t] = std::sin(2.0 * std::numbers::pi * 10.0 * t / 240.0) + 0.5 * std::sin(2.0 * std::numbers::pi * 30.0 * t / 240.0);
    }
    const Data two = spectrum(with_attribute(make_continuous(both, time_axis(240, 240.0), {"x"}), "fs", 240.0));
    const auto w = two.values();
    auto local_max = [&](std::size_t i) { return w[i] > w[i - 1] && w[i] > w[i + 1]; };
    CHECK(local_max(10));
    CHECK(local_max(30));
    CHECK(code_of([] { spectrum(make_continuous({1.0}, {0.0}, {"x"})); }) == Errc::TooFewSamples);
  }

  TEST_CASE("spectrogram") {
    CHECK(spectrogram_segments(240, 120, 0.5) == 3);
    const Data x = sine(20.0, 240.0, 240);
    const Data sg = spectrogram(x, 120, 0.5);
    CHECK(sg.shape() == Shape{3, 61, 1});
    CHECK(sg.names() == std::vector<std::string>{"time", "frequency", "channel"});
    for (std::size_t s = 0; s < 3; ++s) {
      const auto first = sg.values().begin() + static_cast<std::ptrdiff_t>(s * 61);
      CHECK(std::max_element(first, first + 61) - first == 10);  // 20 Hz at 2 Hz bins
    }
    const Data single = spectrogram(x, 240, 0.0);
    const Data full = spectrum(x, Window::Hann);
    CHECK(std::equal(single.values().begin(), single.values().end(), full.values().begin()));
    CHECK(code_of([&] { spectrogram(x, 241, 0.0); }) == Errc::WindowTooLarge);
    CHECK(code_of([&] { spectrogram(x, 100, 1.0); }) == Errc::InvalidArgument);
  }

  TEST_CASE("periodic Hann window") {
    const auto w = make_window(Window::Hann, 4);
    CHECK(w[0] == 0.0);
    CHECK(w[1] == doctest::Approx(0.5));
    CHECK(w[2] == doctest::Approx(1.0));
    CHECK(w[3] == doctest::Approx(0.5));
  }
}
